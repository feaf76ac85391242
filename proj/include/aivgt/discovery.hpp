#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aivgt/graph.hpp"
#include "aivgt/stats.hpp"

namespace aivgt {

/// Conditional-independence backend for the learner: Fisher-z on a sample
/// covariance, or exact d-separation on a known true DAG.
class CiBackend {
 public:
  static CiBackend fisher_z(CovMatrix cov);
  static CiBackend oracle(Dag truth);

  /// p-value style answer: with the oracle this is exactly 0 or 1.
  /// Names refer to learner columns; the oracle resolves them in its DAG.
  double independence_p(const std::string& a, const std::string& b,
                        const std::vector<std::string>& z) const;
  bool is_oracle() const { return truth_.has_value(); }
  long sample_size() const { return cov_ ? cov_->n : 0; }

 private:
  CiBackend() = default;
  std::optional<CovMatrix> cov_;
  std::optional<Dag> truth_;
};

struct LearnerConfig {
  double alpha = 0.05;
  std::optional<int> max_cond_size;  // unset: limited only by neighbourhood size
  bool stable_skeleton = true;
};

struct LearnResult {
  MixedGraph pag{GraphKind::Pag};
  /// Separating set for each removed pair, keyed by sorted name pair.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> sepsets;
  std::vector<std::string> warnings;
};

/// Constraint-based PAG learner: order-independent skeleton, possible-d-sep
/// refinement, collider orientation from separating sets, then the final
/// orientation rules (selection-bias rules are inert in this setting).
/// Output node order follows `cols`; internally everything runs in
/// name-sorted order so results do not depend on column order.
LearnResult learn_pag(const CiBackend& backend, const std::vector<std::string>& cols,
                      const LearnerConfig& cfg);

}  // namespace aivgt
