#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aivgt/dataset.hpp"
#include "aivgt/graph.hpp"

namespace aivgt {

/// The five synthetic structural equation scenarios. All share a binary
/// treatment with a logistic assignment probability, two instruments
/// S1/S2, a latent treatment-outcome confounder U1 and true effect 2.
enum class Scenario : unsigned char { A, B, C, D, E };

Scenario scenario_from_string(const std::string& s);  // "a".."e"
std::string to_string(Scenario sc);

struct SimConfig {
  long n = 10000;
  std::uint64_t seed = 0;
  bool noise_block = true;     // 20 extra mutually correlated columns
  bool eps_as_sd = false;      // read "N(0,0.5)" as sd instead of variance
};

/// Samples the scenario. Columns appear in declared order (scenario
/// variables, treatment, outcome, then the noise block); latent variables
/// are not emitted. Deterministic in (scenario, config).
Dataset generate(Scenario sc, const SimConfig& cfg);

/// Ground-truth DAG over observed and latent variables; the noise block is
/// modelled as children of one latent factor when included.
Dag true_dag(Scenario sc, bool include_noise_block = false);

double true_beta(Scenario sc);  // 2 for every scenario

/// Observed column names in generation order.
std::vector<std::string> observed_columns(Scenario sc, bool noise_block = true);

}  // namespace aivgt
