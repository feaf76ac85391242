#include "aivgt/estimation.hpp"

#include <Eigen/QR>
#include <cmath>

#include "aivgt/errors.hpp"

namespace aivgt {

namespace {

constexpr double kRankTolerance = 1e-12;

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd fitted;
  Eigen::VectorXd se;  // conventional OLS standard errors
};

// OLS via rank-revealing QR; throws singular_design_error when the design
// is rank deficient at the relative tolerance.
OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, bool want_se) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < design.cols()) throw singular_design_error("rank-deficient design matrix");
  OlsFit fit;
  fit.coef = qr.solve(y);
  fit.fitted = design * fit.coef;
  if (want_se) {
    const double dof = static_cast<double>(design.rows() - design.cols());
    if (dof < 1.0) throw input_error("not enough rows for the regression");
    const double rss = (y - fit.fitted).squaredNorm();
    const double sigma2 = rss / dof;
    Eigen::MatrixXd xtx_inv =
        (design.transpose() * design)
            .ldlt()
            .solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
    fit.se = (sigma2 * xtx_inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
  }
  return fit;
}

Eigen::MatrixXd build_design(const Dataset& data, const std::vector<std::string>& cols) {
  Eigen::MatrixXd m(data.n(), cols.size() + 1);
  m.col(0).setOnes();
  for (size_t j = 0; j < cols.size(); ++j) m.col(j + 1) = data.column(cols[j]);
  return m;
}

std::vector<std::string> sorted_names(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void check_distinct(const std::string& w, const std::string& y,
                    const std::vector<std::string>& z) {
  if (w == y) throw input_error("treatment and outcome must differ");
  for (const auto& c : z)
    if (c == w || c == y) throw input_error("conditioning set may not contain " + c);
}

}  // namespace

EffectEstimate tsls(const Dataset& data, const std::string& w, const std::string& y,
                    const std::string& s, const std::vector<std::string>& z) {
  check_distinct(w, y, z);
  if (s == w || s == y) throw input_error("instrument must differ from treatment and outcome");
  for (const auto& c : z)
    if (c == s) throw input_error("conditioning set may not contain the instrument");
  if (data.n() <= static_cast<long>(z.size()) + 3)
    throw input_error("tsls requires n > |z| + 3");

  std::vector<std::string> stage1_cols{s};
  stage1_cols.insert(stage1_cols.end(), z.begin(), z.end());
  Eigen::MatrixXd x1 = build_design(data, stage1_cols);
  OlsFit first = ols(x1, data.column(w), /*want_se=*/true);

  Eigen::MatrixXd x2(data.n(), z.size() + 2);
  x2.col(0).setOnes();
  x2.col(1) = first.fitted;
  for (size_t j = 0; j < z.size(); ++j) x2.col(j + 2) = data.column(z[j]);
  OlsFit second = ols(x2, data.column(y), /*want_se=*/false);

  EffectEstimate out;
  out.method = EstimatorMethod::Tsls;
  out.beta = second.coef(1);
  out.iv = s;
  out.conditioning = sorted_names(z);
  out.first_stage_t = first.se(1) > 0.0 ? first.coef(1) / first.se(1) : 0.0;
  out.weak_instrument = std::abs(out.first_stage_t) < 1.0;
  if (!std::isfinite(out.beta)) throw singular_design_error("non-finite TSLS estimate");
  return out;
}

EffectEstimate iv_ratio(const CovMatrix& c, const std::string& w, const std::string& y,
                        const std::string& s, const std::vector<std::string>& z) {
  check_distinct(w, y, z);
  if (s == w || s == y) throw input_error("instrument must differ from treatment and outcome");
  NodeSet zi;
  for (const auto& col : z) set_insert(zi, c.col(col));
  const int iw = c.col(w), iy = c.col(y), is = c.col(s);
  const double denom = partial_cov(c, is, iw, zi);
  if (std::abs(denom) <= 1e-10)
    throw weak_instrument_error("partial covariance of instrument and treatment is near zero");
  EffectEstimate out;
  out.method = EstimatorMethod::Ratio;
  out.beta = partial_cov(c, is, iy, zi) / denom;
  out.iv = s;
  out.conditioning = sorted_names(z);
  return out;
}

EffectEstimate lsr(const Dataset& data, const std::string& w, const std::string& y,
                   const std::vector<std::string>& x) {
  check_distinct(w, y, x);
  if (data.n() <= static_cast<long>(x.size()) + 2)
    throw input_error("lsr requires n > |x| + 2");
  std::vector<std::string> cols{w};
  cols.insert(cols.end(), x.begin(), x.end());
  OlsFit fit = ols(build_design(data, cols), data.column(y), /*want_se=*/false);
  EffectEstimate out;
  out.method = EstimatorMethod::Lsr;
  out.beta = fit.coef(1);
  out.conditioning = sorted_names(x);
  return out;
}

EffectEstimate composite_iv_tsls(const Dataset& data, const std::string& w, const std::string& y,
                                 const std::vector<std::string>& x) {
  check_distinct(w, y, x);
  if (x.empty()) throw input_error("composite instrument needs at least one covariate");
  OlsFit first = ols(build_design(data, x), data.column(w), /*want_se=*/false);
  Eigen::MatrixXd x2(data.n(), 2);
  x2.col(0).setOnes();
  x2.col(1) = first.fitted;
  OlsFit second = ols(x2, data.column(y), /*want_se=*/false);
  EffectEstimate out;
  out.method = EstimatorMethod::Tsls;
  out.beta = second.coef(1);
  out.iv = "composite(all covariates)";
  out.conditioning = {};
  return out;
}

}  // namespace aivgt
