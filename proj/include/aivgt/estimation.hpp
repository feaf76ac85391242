#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aivgt/dataset.hpp"
#include "aivgt/stats.hpp"

namespace aivgt {

enum class EstimatorMethod : unsigned char { Tsls, Ratio, Lsr };

struct EffectEstimate {
  double beta = 0.0;
  EstimatorMethod method = EstimatorMethod::Tsls;
  std::optional<std::string> iv;          // absent for Lsr
  std::vector<std::string> conditioning;  // sorted column names
  bool weak_instrument = false;           // |first-stage t| < 1 (warning, Tsls only)
  double first_stage_t = 0.0;
};

/// Two-stage least squares with instrument s and conditioning set z, both
/// stages with intercepts: w ~ 1+s+z, then y ~ 1+w_hat+z; returns the
/// w_hat coefficient. Throws singular_design_error on rank deficiency.
EffectEstimate tsls(const Dataset& data, const std::string& w, const std::string& y,
                    const std::string& s, const std::vector<std::string>& z);

/// Partial-covariance ratio sigma_{s,y|z} / sigma_{s,w|z}; throws
/// weak_instrument_error when the denominator is below 1e-10 in absolute
/// value. Algebraically identical to single-instrument TSLS on the sample.
EffectEstimate iv_ratio(const CovMatrix& c, const std::string& w, const std::string& y,
                        const std::string& s, const std::vector<std::string>& z);

/// Ordinary least squares coefficient of w in y ~ 1+w+x.
EffectEstimate lsr(const Dataset& data, const std::string& w, const std::string& y,
                   const std::vector<std::string>& x);

/// Baseline that treats every covariate as an instrument at once: the
/// fitted value of w ~ 1+x becomes a single composite instrument and y is
/// regressed on it alone.
EffectEstimate composite_iv_tsls(const Dataset& data, const std::string& w, const std::string& y,
                                 const std::vector<std::string>& x);

}  // namespace aivgt
