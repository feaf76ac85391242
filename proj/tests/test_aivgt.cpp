#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aivgt/aiv_search.hpp"
#include "aivgt/errors.hpp"
#include "aivgt/report_json.hpp"
#include "aivgt/simdata.hpp"
#include "test_support.hpp"

using namespace aivgt;
using namespace testsupport;

namespace {

std::vector<std::string> observed_names(const Dag& g) {
  std::vector<std::string> out;
  for (int v : g.observed_nodes()) out.push_back(g.name(v));
  return out;
}

MixedGraph oracle_pag(Scenario sc) {
  Dag truth = true_dag(sc);
  return learn_pag(CiBackend::oracle(truth), observed_names(truth), {}).pag;
}

std::vector<std::string> names_of(const MixedGraph& g, const NodeSet& s) {
  std::vector<std::string> out;
  for (int v : s) out.push_back(g.name(v));
  std::sort(out.begin(), out.end());
  return out;
}

using Names = std::vector<std::string>;

}  // namespace

TEST_CASE("candidates from the oracle PAG") {
  MixedGraph a = oracle_pag(Scenario::A);
  CHECK(names_of(a, candidate_aivs(a, a.require("W"), a.require("Y"))) == Names{"S1", "S2"});

  MixedGraph e = oracle_pag(Scenario::E);
  CHECK(names_of(e, candidate_aivs(e, e.require("W"), e.require("Y"))) ==
        Names{"S1", "S2", "X1", "X2", "X3", "X4"});

  // w and y adjacent only to each other: no candidates
  MixedGraph tiny(GraphKind::Pag);
  tiny.add_node("W");
  tiny.add_node("Y");
  tiny.add_node("Z");
  tiny.set_edge(0, 1, Mark::Circle, Mark::Circle);
  CHECK(candidate_aivs(tiny, 0, 1).empty());

  MixedGraph mag(GraphKind::Mag);
  mag.add_node("W");
  mag.add_node("Y");
  mag.set_edge(0, 1, Mark::Tail, Mark::Arrow);
  CHECK_THROWS_AS(candidate_aivs(mag, 0, 1), input_error);
}

TEST_CASE("conditioning sets from the oracle PAG") {
  MixedGraph a = oracle_pag(Scenario::A);
  CHECK(names_of(a, conditioning_set(a, a.require("S1"), a.require("W"), a.require("Y"))) ==
        Names{"S2"});

  MixedGraph d = oracle_pag(Scenario::D);
  // X1 carries arrowheads from S1 and X2: it is dropped as a collider
  CHECK(names_of(d, conditioning_set(d, d.require("S1"), d.require("W"), d.require("Y"))) ==
        Names{"S2", "X2", "X3"});
  CHECK(names_of(d, conditioning_set(d, d.require("S2"), d.require("W"), d.require("Y"))) ==
        Names{"S1", "X2", "X3"});

  MixedGraph b = oracle_pag(Scenario::B);
  // X1 is a possible mediator in (b): it must stay in S2's conditioning set
  CHECK(names_of(b, conditioning_set(b, b.require("S2"), b.require("W"), b.require("Y"))) ==
        Names{"S1", "X1"});

  // conditioning sets instrumentalise their candidates in the true DAGs
  for (Scenario sc : {Scenario::A, Scenario::B, Scenario::C, Scenario::D, Scenario::E}) {
    Dag truth = true_dag(sc);
    MixedGraph pag = oracle_pag(sc);
    const int w = pag.require("W"), y = pag.require("Y");
    for (const char* s : {"S1", "S2"}) {
      NodeSet z = conditioning_set(pag, pag.require(s), w, y);
      NodeSet tz;
      for (int v : z) set_insert(tz, truth.require(pag.name(v)));
      INFO("scenario ", to_string(sc), " instrument ", s);
      CHECK(is_aiv_in_dag(truth, truth.require(s), truth.require("W"), truth.require("Y"), tz));
    }
  }

  // s with no possibly directed path into it and none into y: empty set
  MixedGraph lone(GraphKind::Pag);
  int s = lone.add_node("S");
  int w = lone.add_node("W");
  int y = lone.add_node("Y");
  lone.set_edge(s, w, Mark::Circle, Mark::Arrow);
  lone.set_edge(w, y, Mark::Circle, Mark::Circle);
  lone.set_edge(s, y, Mark::Circle, Mark::Arrow);
  CHECK(conditioning_set(lone, s, w, y).empty());

  CHECK_THROWS_AS(conditioning_set(lone, y, w, y), input_error);
}

TEST_CASE("possible ancestry on the (d) PAG keeps the uncertain collider") {
  // The X1 o-> Y circle is genuine: the equivalence class contains a MAG
  // with X1 -> Y, so X1 is a possible ancestor of Y. The conditioning-set
  // construction is what removes it, not the ancestry query.
  MixedGraph d = oracle_pag(Scenario::D);
  NodeSet pa = possible_ancestors(d, make_set({d.require("S1"), d.require("Y")}));
  CHECK(set_contains(pa, d.require("X1")));
  CHECK(set_contains(pa, d.require("X2")));
  CHECK(set_contains(pa, d.require("W")));
}

TEST_CASE("run_aivgt returns NA when no pair passes the tetrad screen") {
  // restrict scenario (b) to {S1, X1, W, Y}: the only candidate pair is
  // (S1, X1) and X1 fails the tetrad decisively (it affects Y directly)
  SimConfig sim;
  sim.n = 10000;
  sim.seed = 13;
  sim.noise_block = false;
  Dataset full = generate(Scenario::B, sim);
  Dataset cut;
  cut.columns = {"S1", "X1", "W", "Y"};
  cut.values.resize(full.n(), 4);
  for (int j = 0; j < 4; ++j) cut.values.col(j) = full.column(cut.columns[j]);

  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.seed = 1;
  cfg.tetrad_variance = TetradVariance::Wishart;
  EstimateReport r = run_aivgt(cut, cfg);
  CHECK_FALSE(r.estimated);
  REQUIRE(r.na_reason.has_value());
  CHECK(*r.na_reason == NaReason::NoPairPassed);
  CHECK(r.candidates.size() >= 2);
  for (const auto& p : r.all_pairs) CHECK_FALSE(p.passed);
}

TEST_CASE("run_aivgt returns NA with too few candidates") {
  SimConfig sim;
  sim.n = 2000;
  sim.seed = 1;
  sim.noise_block = false;
  Dataset d = generate(Scenario::A, sim);
  // keep only S1, W, Y: a single candidate
  Dataset cut;
  cut.columns = {"S1", "W", "Y"};
  cut.values.resize(d.n(), 3);
  cut.values.col(0) = d.column("S1");
  cut.values.col(1) = d.column("W");
  cut.values.col(2) = d.column("Y");
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.oracle_dag = true_dag(Scenario::A);
  EstimateReport r = run_aivgt(cut, cfg);
  CHECK_FALSE(r.estimated);
  REQUIRE(r.na_reason.has_value());
  CHECK(*r.na_reason == NaReason::TooFewCandidates);
  CHECK(r.candidates.size() <= 1);
}

TEST_CASE("run_aivgt on scenario (a) with the oracle graph") {
  SimConfig sim;
  sim.n = 4000;
  sim.seed = 11;
  sim.noise_block = false;
  Dataset d = generate(Scenario::A, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.seed = 5;
  cfg.oracle_dag = true_dag(Scenario::A);
  cfg.tetrad_variance = TetradVariance::Wishart;
  EstimateReport r = run_aivgt(d, cfg);
  REQUIRE(r.estimated);
  CHECK(r.chosen->s_i == "S1");
  CHECK(r.chosen->s_j == "S2");
  CHECK(std::abs(r.beta - 2.0) / 2.0 < 0.15);
  CHECK(r.beta == doctest::Approx(0.5 * (r.chosen->beta_i + r.chosen->beta_j)));
}

TEST_CASE("run_aivgt is deterministic and column-order invariant") {
  SimConfig sim;
  sim.n = 3000;
  sim.seed = 21;
  sim.noise_block = false;
  Dataset d = generate(Scenario::D, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.seed = 9;
  cfg.bootstrap_reps = 64;
  cfg.oracle_dag = true_dag(Scenario::D);

  EstimateReport r1 = run_aivgt(d, cfg);
  EstimateReport r2 = run_aivgt(d, cfg);
  REQUIRE(r1.estimated == r2.estimated);
  CHECK(r1.beta == r2.beta);

  // permute the columns: identical report content
  Dataset perm;
  std::vector<int> order{6, 2, 0, 4, 1, 5, 3};
  for (int idx : order) perm.columns.push_back(d.columns[idx]);
  perm.values.resize(d.n(), d.p());
  for (size_t j = 0; j < order.size(); ++j) perm.values.col(j) = d.values.col(order[j]);
  EstimateReport r3 = run_aivgt(perm, cfg);
  REQUIRE(r3.estimated == r1.estimated);
  CHECK(r3.beta == doctest::Approx(r1.beta).epsilon(1e-12));
  CHECK(r3.chosen->s_i == r1.chosen->s_i);
  CHECK(r3.chosen->s_j == r1.chosen->s_j);
  REQUIRE(r3.all_pairs.size() == r1.all_pairs.size());
  for (size_t i = 0; i < r1.all_pairs.size(); ++i) {
    CHECK(r3.all_pairs[i].s_i == r1.all_pairs[i].s_i);
    CHECK(r3.all_pairs[i].lambda == doctest::Approx(r1.all_pairs[i].lambda).epsilon(1e-10));
  }
}

TEST_CASE("lambda bounds hold on every reported pair") {
  SimConfig sim;
  sim.n = 3000;
  sim.seed = 33;
  sim.noise_block = false;
  Dataset d = generate(Scenario::E, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.oracle_dag = true_dag(Scenario::E);
  cfg.tetrad_variance = TetradVariance::Wishart;
  EstimateReport r = run_aivgt(d, cfg);
  int checked = 0;
  for (const auto& p : r.all_pairs) {
    if (!p.error.empty()) continue;
    CHECK(p.lambda == doctest::Approx(std::abs(p.epsilon - p.delta)));
    CHECK(p.lambda >= 0.0);
    CHECK(p.lambda <= p.epsilon + p.delta + 1e-12);
    CHECK(p.delta == doctest::Approx(std::abs(p.beta_i - p.beta_j)));
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("candidate set is invariant to positive column scaling in oracle mode") {
  SimConfig sim;
  sim.n = 3000;
  sim.seed = 41;
  sim.noise_block = false;
  Dataset d = generate(Scenario::D, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.oracle_dag = true_dag(Scenario::D);
  cfg.tetrad_variance = TetradVariance::Wishart;
  EstimateReport base = run_aivgt(d, cfg);

  Dataset scaled = d;
  scaled.values.col(scaled.col("S1")) *= 3.0;
  scaled.values.col(scaled.col("X2")) *= 0.25;
  scaled.values.col(scaled.col("X3")) *= 7.0;
  EstimateReport r = run_aivgt(scaled, cfg);
  CHECK(r.candidates == base.candidates);
  // epsilon values move with the scale, the candidate set does not
}

TEST_CASE("shared-conditioning baseline") {
  SimConfig sim;
  sim.n = 3000;
  sim.seed = 51;
  sim.noise_block = false;
  Dataset d = generate(Scenario::A, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.seed = 3;
  cfg.oracle_dag = true_dag(Scenario::A);
  cfg.tetrad_variance = TetradVariance::Wishart;

  EstimateReport aiv = run_aivgt(d, cfg);
  EstimateReport shared = run_shared_conditioning_baseline(d, cfg);
  REQUIRE(aiv.estimated);
  REQUIRE(shared.estimated);
  // no colliders among the covariates of (a): the two agree up to seed noise
  CHECK(std::abs(aiv.beta - shared.beta) < 0.5);
  CHECK(shared.shared_conditioning);

  // with only two covariates the shared conditioning sets are empty
  REQUIRE_FALSE(shared.all_pairs.empty());
  CHECK(shared.all_pairs[0].z_i.empty());
  CHECK(shared.all_pairs[0].z_j.empty());
}

TEST_CASE("json report carries the lambda ingredients") {
  SimConfig sim;
  sim.n = 2000;
  sim.seed = 61;
  sim.noise_block = false;
  Dataset d = generate(Scenario::A, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "Y";
  cfg.oracle_dag = true_dag(Scenario::A);
  cfg.tetrad_variance = TetradVariance::Wishart;
  EstimateReport r = run_aivgt(d, cfg);
  std::string json = report_to_json(r);
  for (const char* key : {"schema_version", "\"tau\"", "\"epsilon\"", "\"delta\"", "\"lambda\"",
                          "\"p_value\"", "\"beta_i\"", "\"beta_j\"", "\"graph\"", "\"seed\"",
                          "\"candidates\""}) {
    INFO("missing key ", key);
    CHECK(json.find(key) != std::string::npos);
  }
}

TEST_CASE("input validation") {
  SimConfig sim;
  sim.n = 1000;
  sim.seed = 71;
  sim.noise_block = false;
  Dataset d = generate(Scenario::A, sim);
  AivgtConfig cfg;
  cfg.treatment = "W";
  cfg.outcome = "W";
  CHECK_THROWS_AS(run_aivgt(d, cfg), input_error);
  cfg.outcome = "nope";
  CHECK_THROWS_AS(run_aivgt(d, cfg), input_error);
  cfg.outcome = "Y";
  cfg.alpha = 2.0;
  CHECK_THROWS_AS(run_aivgt(d, cfg), input_error);
}
