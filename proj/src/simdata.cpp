#include "aivgt/simdata.hpp"

#include <cmath>
#include <random>

#include "aivgt/errors.hpp"
#include "aivgt/util.hpp"

namespace aivgt {

Scenario scenario_from_string(const std::string& s) {
  if (s == "a" || s == "A") return Scenario::A;
  if (s == "b" || s == "B") return Scenario::B;
  if (s == "c" || s == "C") return Scenario::C;
  if (s == "d" || s == "D") return Scenario::D;
  if (s == "e" || s == "E") return Scenario::E;
  throw input_error("unknown scenario '" + s + "' (expected a..e)");
}

std::string to_string(Scenario sc) {
  switch (sc) {
    case Scenario::A: return "a";
    case Scenario::B: return "b";
    case Scenario::C: return "c";
    case Scenario::D: return "d";
    case Scenario::E: return "e";
  }
  return "?";
}

double true_beta(Scenario) { return 2.0; }

namespace {

constexpr int kNoiseCols = 20;
constexpr double kNoiseCorr = 0.3;

std::vector<std::string> scenario_columns(Scenario sc) {
  switch (sc) {
    case Scenario::A: return {"S1", "S2", "W", "Y"};
    case Scenario::B: return {"S1", "S2", "X1", "W", "Y"};
    case Scenario::C: return {"S1", "S2", "X1", "X2", "W", "Y"};
    case Scenario::D: return {"S1", "S2", "X1", "X2", "X3", "W", "Y"};
    case Scenario::E: return {"S1", "S2", "X1", "X2", "X3", "X4", "W", "Y"};
  }
  throw input_error("bad scenario");
}

}  // namespace

std::vector<std::string> observed_columns(Scenario sc, bool noise_block) {
  auto cols = scenario_columns(sc);
  if (noise_block)
    for (int i = 1; i <= kNoiseCols; ++i) cols.push_back("N" + std::to_string(i));
  return cols;
}

Dataset generate(Scenario sc, const SimConfig& cfg) {
  if (cfg.n < 100) throw input_error("simulation needs n >= 100");
  const long n = cfg.n;
  // "N(0, 0.5)" for the X-equation disturbances: variance by default,
  // standard deviation when eps_as_sd is set
  const double eps_sd = cfg.eps_as_sd ? 0.5 : std::sqrt(0.5);

  std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(sc)));
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto draw_normal = [&](Eigen::VectorXd& v, double sd) {
    for (long r = 0; r < n; ++r) v(r) = sd * std_normal(rng);
  };

  Eigen::VectorXd u1(n), u2(n), s1(n), s2(n);
  for (long r = 0; r < n; ++r) u1(r) = unif(rng) < 0.5 ? 1.0 : 0.0;
  draw_normal(s1, 1.0);
  draw_normal(s2, 1.0);
  const bool has_u2 = sc == Scenario::C || sc == Scenario::D || sc == Scenario::E;
  if (has_u2) draw_normal(u2, 1.0);

  Eigen::VectorXd x1(n), x2(n), x3(n), x4(n), eps(n);
  switch (sc) {
    case Scenario::A:
      break;
    case Scenario::B:
      draw_normal(eps, eps_sd);
      x1 = 0.8 * s2 + eps;
      break;
    case Scenario::C:
      draw_normal(x2, 1.0);
      draw_normal(eps, eps_sd);
      x1 = Eigen::VectorXd::Constant(n, 0.3) + s1 + x2 + u2 + eps;
      break;
    case Scenario::D:
    case Scenario::E:
      draw_normal(x2, 1.0);
      draw_normal(eps, eps_sd);
      x1 = Eigen::VectorXd::Constant(n, 0.3) + s1 + x2 + 1.5 * u2 + eps;
      draw_normal(eps, eps_sd);
      x3 = 0.8 * s2 + eps;
      if (sc == Scenario::E) {
        draw_normal(eps, eps_sd);
        x4 = 0.8 * s2 + eps;
      }
      break;
  }

  // treatment assignment: inverse logit of 1 - 3*U1 - 3*S1 - 3*S2
  Eigen::VectorXd w(n);
  for (long r = 0; r < n; ++r) {
    const double prob = 1.0 / (1.0 + std::exp(1.0 - 3.0 * u1(r) - 3.0 * s1(r) - 3.0 * s2(r)));
    w(r) = unif(rng) < prob ? 1.0 : 0.0;
  }

  Eigen::VectorXd eps_w(n);
  draw_normal(eps_w, 1.0);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 2.0) + 2.0 * w + 3.0 * u1 + eps_w;
  switch (sc) {
    case Scenario::A:
      break;
    case Scenario::B:
      y += 3.0 * x1;
      break;
    case Scenario::C:
      y += 2.0 * u2 + 2.0 * x2;
      break;
    case Scenario::D:
      y += 2.0 * u2 + 2.0 * x2 + 2.0 * x3;
      break;
    case Scenario::E:
      y += 2.0 * u2 + 2.0 * x2 + 2.0 * x3 + 2.0 * x4;
      break;
  }

  Dataset d;
  d.columns = observed_columns(sc, cfg.noise_block);
  d.values.resize(n, static_cast<int>(d.columns.size()));
  int c = 0;
  auto emit = [&](const Eigen::VectorXd& v) { d.values.col(c++) = v; };
  emit(s1);
  emit(s2);
  if (sc != Scenario::A) emit(x1);
  if (has_u2) emit(x2);
  if (sc == Scenario::D || sc == Scenario::E) emit(x3);
  if (sc == Scenario::E) emit(x4);
  emit(w);
  emit(y);

  if (cfg.noise_block) {
    // exchangeable correlation 0.3 through a single latent factor
    Eigen::VectorXd factor(n);
    draw_normal(factor, 1.0);
    const double load = std::sqrt(kNoiseCorr);
    const double resid = std::sqrt(1.0 - kNoiseCorr);
    Eigen::VectorXd e(n);
    for (int i = 0; i < kNoiseCols; ++i) {
      draw_normal(e, 1.0);
      d.values.col(c++) = load * factor + resid * e;
    }
  }
  d.provenance = "simulated scenario " + to_string(sc) + " seed " + std::to_string(cfg.seed);
  d.validate();
  return d;
}

Dag true_dag(Scenario sc, bool include_noise_block) {
  Dag g;
  for (const auto& name : scenario_columns(sc)) g.add_node(name);
  g.add_node("U1", /*observed=*/false);
  const bool has_u2 = sc == Scenario::C || sc == Scenario::D || sc == Scenario::E;
  if (has_u2) g.add_node("U2", /*observed=*/false);

  g.add_edge("S1", "W");
  g.add_edge("S2", "W");
  g.add_edge("U1", "W");
  g.add_edge("U1", "Y");
  g.add_edge("W", "Y");
  switch (sc) {
    case Scenario::A:
      break;
    case Scenario::B:
      g.add_edge("S2", "X1");
      g.add_edge("X1", "Y");
      break;
    case Scenario::E:
      g.add_edge("S2", "X4");
      g.add_edge("X4", "Y");
      [[fallthrough]];
    case Scenario::D:
      g.add_edge("S2", "X3");
      g.add_edge("X3", "Y");
      [[fallthrough]];
    case Scenario::C:
      g.add_edge("S1", "X1");
      g.add_edge("X2", "X1");
      g.add_edge("U2", "X1");
      g.add_edge("X2", "Y");
      g.add_edge("U2", "Y");
      break;
  }

  if (include_noise_block) {
    int factor = g.add_node("NL", /*observed=*/false);
    for (int i = 1; i <= kNoiseCols; ++i) {
      int v = g.add_node("N" + std::to_string(i));
      g.add_edge(factor, v);
    }
  }
  return g;
}

}  // namespace aivgt
