#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aivgt/dataset.hpp"
#include "aivgt/discovery.hpp"
#include "aivgt/graph.hpp"
#include "aivgt/stats.hpp"

namespace aivgt {

/// Candidate instruments read off a PAG: every neighbour of the treatment
/// or the outcome, minus the two themselves.
NodeSet candidate_aivs(const MixedGraph& g, int w, int y);

/// Conditioning set for candidate s: possible ancestors of {s, y} minus
/// {s, w, y}. Nodes that carry arrowheads from two distinct neighbours are
/// colliders on those paths in every represented MAG; they and their
/// possible descendants are excluded, since conditioning on them opens
/// non-causal paths between the instrument and the outcome.
NodeSet conditioning_set(const MixedGraph& g, int s, int w, int y);

enum class NaReason : unsigned char { TooFewCandidates, NoPairPassed };

struct CandidatePair {
  std::string s_i, s_j;                  // names, s_i < s_j
  std::vector<std::string> z_i, z_j;     // sorted names
  double beta_i = 0.0, beta_j = 0.0;
  double epsilon = 0.0;                  // |tau|
  double delta = 0.0;                    // |beta_i - beta_j|
  double lambda = 0.0;                   // |epsilon - delta|
  double p_value = 0.0;
  double tau = 0.0;
  double tetrad_sd = 0.0;
  double epsilon_scaled = 0.0;  // |ratio_i - ratio_j|, diagnostic only
  bool passed = false;
  bool weak_instrument_i = false, weak_instrument_j = false;
  bool variance_modes_disagree = false;  // bootstrap vs Wishart verdicts differ
  std::string error;                     // non-empty when the pair was disqualified
};

struct AivgtConfig {
  std::string treatment;
  std::string outcome;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  TetradVariance tetrad_variance = TetradVariance::Bootstrap;
  int bootstrap_reps = 500;
  LearnerConfig learner;
  std::optional<MixedGraph> graph;  // pre-learned PAG; skips learning
  std::optional<Dag> oracle_dag;    // CI oracle backend for the learner
};

struct EstimateReport {
  bool estimated = false;
  double beta = 0.0;                      // mean of the chosen pair's betas
  std::optional<NaReason> na_reason;
  std::optional<CandidatePair> chosen;
  std::vector<CandidatePair> all_pairs;   // lexicographic by (s_i, s_j)
  std::vector<std::string> candidates;    // sorted candidate names
  MixedGraph graph{GraphKind::Pag};
  std::vector<std::string> warnings;
  AivgtConfig config;                     // echo
  bool shared_conditioning = false;
};

/// The full search: learn (or accept) a PAG, extract candidates, build
/// per-candidate conditioning sets, estimate per-candidate effects, screen
/// every unordered pair with the generalised tetrad test and return the
/// mean effect of the minimum-lambda passing pair.
EstimateReport run_aivgt(const Dataset& data, const AivgtConfig& cfg);

/// Baseline with one shared conditioning set per pair: all covariates
/// except the pair itself (no graph involvement in the conditioning sets).
EstimateReport run_shared_conditioning_baseline(const Dataset& data, const AivgtConfig& cfg);

const char* to_string(NaReason r);

}  // namespace aivgt
