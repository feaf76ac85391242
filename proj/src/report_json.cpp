#include "aivgt/report_json.hpp"

#include <cmath>
#include <json.hpp>

#include "aivgt/graph_io.hpp"

namespace aivgt {

namespace {

using nlohmann::json;

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json pair_to_json(const CandidatePair& p) {
  json j;
  j["s_i"] = p.s_i;
  j["s_j"] = p.s_j;
  j["z_i"] = p.z_i;
  j["z_j"] = p.z_j;
  j["beta_i"] = finite_or_null(p.beta_i);
  j["beta_j"] = finite_or_null(p.beta_j);
  j["tau"] = finite_or_null(p.tau);
  j["epsilon"] = finite_or_null(p.epsilon);
  j["delta"] = finite_or_null(p.delta);
  j["lambda"] = finite_or_null(p.lambda);
  j["epsilon_scaled"] = finite_or_null(p.epsilon_scaled);
  j["tetrad_sd"] = finite_or_null(p.tetrad_sd);
  j["p_value"] = finite_or_null(p.p_value);
  j["passed"] = p.passed;
  j["weak_instrument_i"] = p.weak_instrument_i;
  j["weak_instrument_j"] = p.weak_instrument_j;
  j["variance_modes_disagree"] = p.variance_modes_disagree;
  if (!p.error.empty()) j["error"] = p.error;
  return j;
}

}  // namespace

std::string report_to_json(const EstimateReport& r) {
  json j;
  j["schema_version"] = 1;
  j["config"] = {
      {"treatment", r.config.treatment},
      {"outcome", r.config.outcome},
      {"alpha", r.config.alpha},
      {"seed", r.config.seed},
      {"tetrad_variance",
       r.config.tetrad_variance == TetradVariance::Bootstrap ? "bootstrap" : "wishart"},
      {"bootstrap_reps", r.config.bootstrap_reps},
      {"shared_conditioning", r.shared_conditioning},
      {"max_cond_size", r.config.learner.max_cond_size
                            ? json(*r.config.learner.max_cond_size)
                            : json(nullptr)},
  };
  if (r.estimated) {
    j["result"] = {{"status", "estimated"}, {"beta", r.beta}};
  } else {
    j["result"] = {{"status", "na"},
                   {"reason", r.na_reason ? to_string(*r.na_reason) : "unknown"}};
  }
  if (r.chosen) j["chosen"] = pair_to_json(*r.chosen);
  j["candidates"] = r.candidates;
  json pairs = json::array();
  for (const auto& p : r.all_pairs) pairs.push_back(pair_to_json(p));
  j["pairs"] = pairs;
  j["graph"] = serialize_graph(r.graph);
  j["warnings"] = r.warnings;
  return j.dump(2);
}

}  // namespace aivgt
