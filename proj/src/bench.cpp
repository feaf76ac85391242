#include "aivgt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "aivgt/aiv_search.hpp"
#include "aivgt/errors.hpp"
#include "aivgt/estimation.hpp"
#include "aivgt/util.hpp"

namespace aivgt {

namespace {

double pct_bias(double beta, double truth) { return std::abs((beta - truth) / truth) * 100.0; }

std::vector<std::string> covariate_names(const Dataset& d) {
  std::vector<std::string> out;
  for (const auto& c : d.columns)
    if (c != "W" && c != "Y") out.push_back(c);
  return out;
}

std::string pair_label(const EstimateReport& r) {
  if (!r.chosen) return "";
  return r.chosen->s_i + "," + r.chosen->s_j;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  struct Cell {
    Scenario sc;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Scenario sc : cfg.scenarios)
    for (int rep = 0; rep < cfg.reps; ++rep)
      cells.push_back({sc, cfg.seed + static_cast<std::uint64_t>(rep)});

  std::vector<std::vector<BenchRow>> per_cell(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int idx) {
    const Cell& cell = cells[idx];
    const double truth = true_beta(cell.sc);
    SimConfig sim;
    sim.n = cfg.n;
    sim.seed = cell.seed;
    Dataset data = generate(cell.sc, sim);
    std::vector<std::string> covs = covariate_names(data);

    std::vector<BenchRow>& rows = per_cell[idx];
    auto base_row = [&](const char* name) {
      BenchRow r;
      r.scenario = cell.sc;
      r.estimator = name;
      r.seed = cell.seed;
      return r;
    };

    {
      BenchRow r = base_row("lsr");
      try {
        r.beta = lsr(data, "W", "Y", covs).beta;
        r.bias_pct = pct_bias(*r.beta, truth);
      } catch (const error& e) {
        r.na_reason = e.what();
      }
      rows.push_back(r);
    }
    {
      BenchRow r = base_row("naive_tsls");
      try {
        r.beta = composite_iv_tsls(data, "W", "Y", covs).beta;
        r.bias_pct = pct_bias(*r.beta, truth);
      } catch (const error& e) {
        r.na_reason = e.what();
      }
      rows.push_back(r);
    }

    AivgtConfig ac;
    ac.treatment = "W";
    ac.outcome = "Y";
    ac.alpha = cfg.alpha;
    ac.seed = cell.seed;
    ac.tetrad_variance = cfg.tetrad_variance;
    ac.bootstrap_reps = cfg.bootstrap_reps;
    ac.learner.max_cond_size = cfg.max_cond_size;

    // the two graph-based estimators share one learned PAG per dataset
    std::optional<MixedGraph> learned;
    {
      BenchRow r = base_row("aivgt");
      try {
        EstimateReport rep = run_aivgt(data, ac);
        learned = rep.graph;
        r.chosen_pair = pair_label(rep);
        if (rep.estimated) {
          r.beta = rep.beta;
          r.bias_pct = pct_bias(*r.beta, truth);
        } else {
          r.na_reason = to_string(*rep.na_reason);
        }
      } catch (const error& e) {
        r.na_reason = e.what();
      }
      rows.push_back(r);
    }
    {
      BenchRow r = base_row("shared_conditioning");
      try {
        AivgtConfig sc_cfg = ac;
        if (learned) sc_cfg.graph = learned;
        EstimateReport rep = run_shared_conditioning_baseline(data, sc_cfg);
        r.chosen_pair = pair_label(rep);
        if (rep.estimated) {
          r.beta = rep.beta;
          r.bias_pct = pct_bias(*r.beta, truth);
        } else {
          r.na_reason = to_string(*rep.na_reason);
        }
      } catch (const error& e) {
        r.na_reason = e.what();
      }
      rows.push_back(r);
    }
  });

  std::vector<BenchRow> rows;
  for (const auto& cell_rows : per_cell)
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  return rows;
}

std::string bench_rows_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "scenario,estimator,seed,beta,bias_pct,na_reason,chosen_pair\n";
  for (const auto& r : rows) {
    os << to_string(r.scenario) << ',' << r.estimator << ',' << r.seed << ',';
    if (r.beta) os << *r.beta;
    os << ',';
    if (r.bias_pct) os << *r.bias_pct;
    os << ',' << r.na_reason << ',';
    if (!r.chosen_pair.empty()) os << '"' << r.chosen_pair << '"';
    os << '\n';
  }
  return os.str();
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) groups[{to_string(r.scenario), r.estimator}].push_back(&r);
  std::vector<BenchSummary> out;
  for (const auto& [key, group] : groups) {
    BenchSummary s;
    s.scenario = scenario_from_string(key.first);
    s.estimator = key.second;
    s.runs = static_cast<int>(group.size());
    std::vector<double> biases;
    int s1s2 = 0;
    for (const BenchRow* r : group) {
      if (r->bias_pct)
        biases.push_back(*r->bias_pct);
      else
        ++s.na_count;
      if (r->chosen_pair == "S1,S2") ++s1s2;
    }
    s.median_bias_pct = median(biases);
    s.pair_s1s2_rate = s.runs ? static_cast<double>(s1s2) / s.runs : 0.0;
    out.push_back(s);
  }
  return out;
}

std::string summary_table(const std::vector<BenchSummary>& summaries) {
  std::ostringstream os;
  os << "scenario  estimator             runs  na  median_bias_pct  pair_S1S2_rate\n";
  for (const auto& s : summaries) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-9s %-21s %4d %3d  %15.3f  %14.3f\n",
                  to_string(s.scenario).c_str(), s.estimator.c_str(), s.runs, s.na_count,
                  s.median_bias_pct, s.pair_s1s2_rate);
    os << line;
  }
  return os.str();
}

}  // namespace aivgt
