#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "aivgt/aiv_search.hpp"
#include "aivgt/bench.hpp"
#include "aivgt/errors.hpp"
#include "aivgt/graph_io.hpp"
#include "aivgt/report_json.hpp"
#include "aivgt/simdata.hpp"

namespace {

using namespace aivgt;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write file: " + path);
  out << text;
}

void print_report(const EstimateReport& r) {
  std::cout << "candidates: ";
  for (size_t i = 0; i < r.candidates.size(); ++i)
    std::cout << (i ? ", " : "") << r.candidates[i];
  std::cout << "\n";
  for (const auto& p : r.all_pairs) {
    std::cout << "pair (" << p.s_i << ", " << p.s_j << ")";
    if (!p.error.empty()) {
      std::cout << "  disqualified: " << p.error << "\n";
      continue;
    }
    std::cout << "  beta_i=" << p.beta_i << " beta_j=" << p.beta_j << " eps=" << p.epsilon
              << " delta=" << p.delta << " lambda=" << p.lambda << " p=" << p.p_value
              << (p.passed ? "  PASS" : "  reject") << "\n";
  }
  if (r.estimated) {
    std::cout << "chosen pair: {" << r.chosen->s_i << ", " << r.chosen->s_j << "}\n";
    std::cout << "conditioning z_i: ";
    for (size_t i = 0; i < r.chosen->z_i.size(); ++i)
      std::cout << (i ? ", " : "") << r.chosen->z_i[i];
    std::cout << "\nconditioning z_j: ";
    for (size_t i = 0; i < r.chosen->z_j.size(); ++i)
      std::cout << (i ? ", " : "") << r.chosen->z_j[i];
    std::cout << "\nbeta = " << r.beta << "\n";
  } else {
    std::cout << "NA (" << (r.na_reason ? to_string(*r.na_reason) : "unknown") << ")\n";
  }
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
}

int cmd_estimate(const std::string& data_path, const std::string& treatment,
                 const std::string& outcome, double alpha, std::uint64_t seed,
                 const std::string& tetrad_var, const std::string& graph_path,
                 const std::string& json_path, bool shared, int max_cond, int bootstrap_reps) {
  Dataset data = read_csv(data_path);
  AivgtConfig cfg;
  cfg.treatment = treatment;
  cfg.outcome = outcome;
  cfg.alpha = alpha;
  cfg.seed = seed;
  cfg.bootstrap_reps = bootstrap_reps;
  cfg.tetrad_variance =
      tetrad_var == "wishart" ? TetradVariance::Wishart : TetradVariance::Bootstrap;
  if (max_cond >= 0) cfg.learner.max_cond_size = max_cond;
  if (!graph_path.empty()) {
    ParsedGraph g = read_graph_file(graph_path);
    if (!std::holds_alternative<MixedGraph>(g))
      throw input_error("--graph expects a PAG file");
    cfg.graph = std::get<MixedGraph>(g);
  }
  EstimateReport report =
      shared ? run_shared_conditioning_baseline(data, cfg) : run_aivgt(data, cfg);
  print_report(report);
  if (!json_path.empty()) write_text_file(json_path, report_to_json(report));
  return report.estimated ? 0 : 2;
}

int cmd_learn_graph(const std::string& data_path, const std::string& oracle_dag_path,
                    const std::string& out_path, double alpha, int max_cond) {
  LearnerConfig cfg;
  cfg.alpha = alpha;
  if (max_cond >= 0) cfg.max_cond_size = max_cond;

  std::vector<std::string> cols;
  std::optional<CiBackend> backend;
  if (!oracle_dag_path.empty()) {
    ParsedGraph g = read_graph_file(oracle_dag_path);
    if (!std::holds_alternative<Dag>(g)) throw input_error("--oracle-dag expects a DAG file");
    const Dag& dag = std::get<Dag>(g);
    for (int v : dag.observed_nodes()) cols.push_back(dag.name(v));
    backend = CiBackend::oracle(dag);
  } else {
    Dataset data = read_csv(data_path);
    cols = data.columns;
    backend = CiBackend::fisher_z(cov_matrix(data));
  }
  LearnResult res = learn_pag(*backend, cols, cfg);
  write_graph_file(out_path, res.pag);
  std::cout << "wrote PAG with " << res.pag.edge_count() << " edges to " << out_path << "\n";
  for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int cmd_list_scenarios() {
  for (const char* id : {"a", "b", "c", "d", "e"}) {
    Scenario sc = scenario_from_string(id);
    auto cols = observed_columns(sc, /*noise_block=*/false);
    std::cout << id << ": true_beta=" << true_beta(sc) << ", columns";
    for (const auto& c : cols) std::cout << " " << c;
    std::cout << " (+20 noise columns by default)\n";
  }
  return 0;
}

int cmd_simulate(const std::string& scenario, long n, std::uint64_t seed, bool no_noise,
                 bool eps_as_sd, const std::string& out_path, std::string dag_out) {
  Scenario sc = scenario_from_string(scenario);
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.noise_block = !no_noise;
  cfg.eps_as_sd = eps_as_sd;
  Dataset d = generate(sc, cfg);
  write_csv(d, out_path);
  std::cout << "scenario " << scenario << ": wrote " << d.n() << " rows x " << d.p()
            << " columns to " << out_path << "\n";
  std::cout << "true_beta = " << true_beta(sc) << "\n";
  if (dag_out.empty()) dag_out = out_path + ".dag";
  write_graph_file(dag_out, true_dag(sc, cfg.noise_block));
  std::cout << "true DAG written to " << dag_out << "\n";
  return 0;
}

int cmd_bench(const std::string& scenarios, long n, int reps, std::uint64_t seed, double alpha,
              const std::string& tetrad_var, int max_cond, int bootstrap_reps,
              const std::string& out_csv) {
  BenchConfig cfg;
  cfg.scenarios.clear();
  for (char ch : scenarios) {
    if (ch == ',') continue;
    cfg.scenarios.push_back(scenario_from_string(std::string(1, ch)));
  }
  cfg.n = n;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.alpha = alpha;
  cfg.tetrad_variance =
      tetrad_var == "wishart" ? TetradVariance::Wishart : TetradVariance::Bootstrap;
  cfg.max_cond_size = max_cond;
  cfg.bootstrap_reps = bootstrap_reps;

  std::vector<BenchRow> rows = run_bench(cfg);
  std::cout << summary_table(summarize(rows));
  if (!out_csv.empty()) {
    write_text_file(out_csv, bench_rows_csv(rows));
    std::cout << "per-run rows written to " << out_csv << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven ancestral-IV causal effect estimation"};
  app.require_subcommand(1);

  // estimate
  std::string data_path, treatment, outcome, tetrad_var = "bootstrap";
  std::string graph_path, json_path;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool shared = false;
  int max_cond = -1;
  int bootstrap_reps = 500;
  auto* est = app.add_subcommand("estimate", "Estimate the effect of a treatment on an outcome");
  est->add_option("--data", data_path, "input CSV")->required();
  est->add_option("--treatment", treatment, "treatment column")->required();
  est->add_option("--outcome", outcome, "outcome column")->required();
  est->add_option("--alpha", alpha, "significance level");
  est->add_option("--seed", seed, "random seed");
  est->add_option("--tetrad-var", tetrad_var, "tetrad variance mode")
      ->check(CLI::IsMember({"bootstrap", "wishart"}));
  est->add_option("--bootstrap-reps", bootstrap_reps, "bootstrap resamples");
  est->add_option("--graph", graph_path, "pre-learned PAG file (skips learning)");
  est->add_option("--json", json_path, "write a JSON report here");
  est->add_option("--max-cond", max_cond, "cap the learner's conditioning-set size");
  est->add_flag("--shared-conditioning", shared,
                "shared conditioning baseline instead of per-instrument sets");

  // learn-graph
  std::string lg_data, lg_oracle, lg_out;
  double lg_alpha = 0.05;
  int lg_max_cond = -1;
  auto* lg = app.add_subcommand("learn-graph", "Learn a PAG from data or a d-separation oracle");
  lg->add_option("--data", lg_data, "input CSV");
  lg->add_option("--oracle-dag", lg_oracle, "true-DAG file used as a CI oracle");
  lg->add_option("--out", lg_out, "output PAG file")->required();
  lg->add_option("--alpha", lg_alpha, "significance level");
  lg->add_option("--max-cond", lg_max_cond, "cap the conditioning-set size");

  // simulate
  std::string sim_scenario = "a", sim_out, sim_dag_out;
  long sim_n = 10000;
  std::uint64_t sim_seed = 0;
  bool sim_no_noise = false, sim_eps_sd = false, sim_list = false;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_flag("--list-scenarios", sim_list, "list the available scenarios and exit");
  sim->add_option("--scenario", sim_scenario, "a|b|c|d|e");
  sim->add_option("--n", sim_n, "sample size");
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_flag("--no-noise-block", sim_no_noise, "omit the 20 correlated noise columns");
  sim->add_flag("--eps-as-sd", sim_eps_sd, "read N(0,0.5) disturbances as sd instead of variance");
  sim->add_option("--out", sim_out, "output CSV");
  sim->add_option("--dag-out", sim_dag_out, "true DAG path (default: <out>.dag)");

  // bench
  std::string bench_scenarios = "a,b,c,d,e", bench_out, bench_tetrad = "bootstrap";
  long bench_n = 10000;
  int bench_reps = 30, bench_max_cond = 4, bench_boot = 500;
  std::uint64_t bench_seed = 1;
  double bench_alpha = 0.05;
  auto* bench = app.add_subcommand("bench", "Bias benchmark across scenarios and estimators");
  bench->add_option("--scenarios", bench_scenarios, "comma-separated scenario letters");
  bench->add_option("--n", bench_n, "sample size per run");
  bench->add_option("--reps", bench_reps, "seeds per scenario");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--alpha", bench_alpha, "significance level");
  bench->add_option("--tetrad-var", bench_tetrad, "tetrad variance mode")
      ->check(CLI::IsMember({"bootstrap", "wishart"}));
  bench->add_option("--max-cond", bench_max_cond, "learner conditioning-set cap");
  bench->add_option("--bootstrap-reps", bench_boot, "bootstrap resamples");
  bench->add_option("--out", bench_out, "write per-run rows CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed())
      return cmd_estimate(data_path, treatment, outcome, alpha, seed, tetrad_var, graph_path,
                          json_path, shared, max_cond, bootstrap_reps);
    if (lg->parsed()) {
      if (lg_data.empty() == lg_oracle.empty())
        throw input_error("learn-graph needs exactly one of --data or --oracle-dag");
      return cmd_learn_graph(lg_data, lg_oracle, lg_out, lg_alpha, lg_max_cond);
    }
    if (sim->parsed()) {
      if (sim_list) return cmd_list_scenarios();
      if (sim_out.empty()) throw input_error("simulate needs --out (or --list-scenarios)");
      return cmd_simulate(sim_scenario, sim_n, sim_seed, sim_no_noise, sim_eps_sd, sim_out,
                          sim_dag_out);
    }
    if (bench->parsed())
      return cmd_bench(bench_scenarios, bench_n, bench_reps, bench_seed, bench_alpha,
                       bench_tetrad, bench_max_cond, bench_boot, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
