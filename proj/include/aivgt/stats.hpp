#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aivgt/dataset.hpp"
#include "aivgt/util.hpp"

namespace aivgt {

/// Sample covariance matrix (divisor n-1) with column labels.
struct CovMatrix {
  Eigen::MatrixXd sigma;
  long n = 0;
  std::vector<std::string> labels;

  int p() const { return static_cast<int>(sigma.cols()); }
  int col(std::string_view name) const;  // throws input_error
};

/// Unbiased sample covariance of the selected columns (all when empty).
/// Throws degenerate_column_error when a column is constant.
CovMatrix cov_matrix(const Dataset& data, const std::vector<std::string>& cols = {});

/// Population covariance of a CovMatrix-shaped object can also be built
/// directly (tests do this); `n` is then a nominal sample size.
CovMatrix make_cov(Eigen::MatrixXd sigma, long n, std::vector<std::string> labels);

/// Partial covariance sigma_{a,b|z} via the Schur complement
/// Sigma_ab - Sigma_az Sigma_zz^{-1} Sigma_zb. Plain covariance when z is
/// empty. Throws singular_conditioning_error when rcond(Sigma_zz) < 1e-12.
double partial_cov(const CovMatrix& c, int a, int b, const NodeSet& z);

/// Partial covariance block of `vars` given z, in one factorization.
Eigen::MatrixXd partial_cov_block(const CovMatrix& c, const NodeSet& vars, const NodeSet& z);

/// Partial correlation r_{a,b|z}; fast path shared by the CI test and the
/// structure learner.
double partial_corr(const CovMatrix& c, int a, int b, const NodeSet& z);

struct CiResult {
  double statistic = 0.0;  // Fisher z
  double p_value = 1.0;
  long df_used = 0;        // n - |z| - 3
};

/// Gaussian conditional-independence test via the Fisher z-transform.
CiResult fisher_z_test(const CovMatrix& c, int a, int b, const NodeSet& z);

enum class TetradVariance : unsigned char { Bootstrap, Wishart };

struct TetradOptions {
  double alpha = 0.05;
  TetradVariance variance = TetradVariance::Bootstrap;
  int bootstrap_reps = 500;
  std::uint64_t seed = 0;
};

struct TetradResult {
  double tau = 0.0;      // sigma_{si.y|zi} sigma_{sj.w|zj} - sigma_{si.w|zi} sigma_{sj.y|zj}
  double epsilon = 0.0;  // |tau|
  double sd = 0.0;       // estimated standard deviation of tau
  double p_value = 1.0;
  bool accepted = false;  // p_value > alpha
};

/// The tetrad difference alone, from partial covariances.
double tetrad_stat(const CovMatrix& c, int s_i, int s_j, int w, int y, const NodeSet& z_i,
                   const NodeSet& z_j);

/// Wishart-style test: tau over a closed-form standard deviation computed
/// on the partial covariance matrix of {s_i, s_j, w, y} given z_i u z_j
/// with effective sample size n - |z_i u z_j|.
TetradResult tetrad_test_wishart(const CovMatrix& c, int s_i, int s_j, int w, int y,
                                 const NodeSet& z_i, const NodeSet& z_j, double alpha);

/// Nonparametric row bootstrap (seeded, fixed resample ordering) for the
/// standard deviation of tau. Column indices refer to `data`.
TetradResult tetrad_test_bootstrap(const Dataset& data, const CovMatrix& c, int s_i, int s_j,
                                   int w, int y, const NodeSet& z_i, const NodeSet& z_j,
                                   const TetradOptions& opt);

/// Dispatches on opt.variance; `data` is required for the bootstrap mode.
TetradResult tetrad_test(const Dataset* data, const CovMatrix& c, int s_i, int s_j, int w, int y,
                         const NodeSet& z_i, const NodeSet& z_j, const TetradOptions& opt);

/// Two-sided standard normal tail probability for |statistic|.
double normal_two_sided_p(double statistic);

}  // namespace aivgt
