#include "aivgt/aiv_search.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "aivgt/errors.hpp"
#include "aivgt/estimation.hpp"

namespace aivgt {

const char* to_string(NaReason r) {
  switch (r) {
    case NaReason::TooFewCandidates: return "TooFewCandidates";
    case NaReason::NoPairPassed: return "NoPairPassed";
  }
  return "?";
}

NodeSet candidate_aivs(const MixedGraph& g, int w, int y) {
  if (g.kind() != GraphKind::Pag) throw input_error("candidate_aivs expects a PAG");
  NodeSet out = set_union(g.neighbors(w), g.neighbors(y));
  return set_minus(out, make_set({w, y}));
}

namespace {

// Nodes with arrowheads from two distinct neighbours: colliders on that
// path in every MAG of the equivalence class.
NodeSet definite_collider_nodes(const MixedGraph& g) {
  NodeSet out;
  for (int v = 0; v < g.node_count(); ++v) {
    int arrows_in = 0;
    for (int u : g.neighbors(v))
      if (g.mark_at(v, u) == Mark::Arrow) ++arrows_in;
    if (arrows_in >= 2) out.push_back(v);
  }
  return out;
}

}  // namespace

NodeSet conditioning_set(const MixedGraph& g, int s, int w, int y) {
  NodeSet cands = candidate_aivs(g, w, y);
  if (!set_contains(cands, s))
    throw input_error("conditioning_set: " + g.name(s) + " is not a candidate instrument");
  NodeSet z = possible_ancestors(g, make_set({s, y}));
  z = set_minus(z, make_set({s, w, y}));
  NodeSet colliders = definite_collider_nodes(g);
  if (!colliders.empty()) z = set_minus(z, possible_descendants(g, colliders));
  return z;
}

namespace {

// Per-candidate-side partial covariances with y and w.
struct SidePartials {
  double with_y = 0.0;
  double with_w = 0.0;
  bool ok = false;
};

SidePartials side_partials(const CovMatrix& c, int s, int w, int y, const NodeSet& z) {
  SidePartials out;
  NodeSet vars = make_set({s, w, y});
  Eigen::MatrixXd blk = partial_cov_block(c, vars, z);
  auto at = [&](int u, int v) {
    int iu = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), u) - vars.begin());
    int iv = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    return blk(iu, iv);
  };
  out.with_y = at(s, y);
  out.with_w = at(s, w);
  out.ok = true;
  return out;
}

struct RunInputs {
  const Dataset& data;
  const AivgtConfig& cfg;
  bool shared = false;
};

std::string mode_name(TetradVariance v) {
  return v == TetradVariance::Bootstrap ? "bootstrap" : "wishart";
}

// Shared bootstrap: one set of row resamples serves every pair, so the
// whole screen costs one covariance pass per draw.
std::vector<double> bootstrap_tau_sd(const Dataset& data, const std::vector<std::string>& used,
                                     const std::vector<std::pair<NodeSet, NodeSet>>& pair_sides,
                                     const std::vector<std::tuple<int, int, int, int>>& pair_cols,
                                     int reps, std::uint64_t seed) {
  const long n = data.n();
  const int k = static_cast<int>(used.size());
  Eigen::MatrixXd base(n, k);
  for (int j = 0; j < k; ++j) base.col(j) = data.values.col(data.col(used[j]));

  const int npairs = static_cast<int>(pair_cols.size());
  std::vector<std::vector<double>> taus(reps, std::vector<double>(npairs, 0.0));
  std::vector<char> draw_ok(reps, 1);

  parallel_for(reps, [&](int rep) {
    std::mt19937_64 rng(mix_seed(seed, 0xb007 + static_cast<std::uint64_t>(rep)));
    std::uniform_int_distribution<long> pick(0, n - 1);
    Eigen::MatrixXd draw(n, k);
    for (long r = 0; r < n; ++r) draw.row(r) = base.row(pick(rng));
    Eigen::RowVectorXd mean = draw.colwise().mean();
    draw.rowwise() -= mean;
    Eigen::MatrixXd sigma = (draw.transpose() * draw) / static_cast<double>(n - 1);
    sigma = ((sigma + sigma.transpose()) * 0.5).eval();
    CovMatrix cb{std::move(sigma), n, used};
    try {
      for (int q = 0; q < npairs; ++q) {
        auto [si, sj, w, y] = pair_cols[q];
        SidePartials a = side_partials(cb, si, w, y, pair_sides[q].first);
        SidePartials b = side_partials(cb, sj, w, y, pair_sides[q].second);
        taus[rep][q] = a.with_y * b.with_w - a.with_w * b.with_y;
      }
    } catch (const error&) {
      draw_ok[rep] = 0;
    }
  });

  std::vector<double> sds(npairs, 0.0);
  for (int q = 0; q < npairs; ++q) {
    double mean = 0.0;
    int m = 0;
    for (int rep = 0; rep < reps; ++rep)
      if (draw_ok[rep]) {
        mean += taus[rep][q];
        ++m;
      }
    if (m < 16) {
      sds[q] = -1.0;  // signals a failed bootstrap for this pair
      continue;
    }
    mean /= m;
    double ss = 0.0;
    for (int rep = 0; rep < reps; ++rep)
      if (draw_ok[rep]) ss += (taus[rep][q] - mean) * (taus[rep][q] - mean);
    sds[q] = std::sqrt(ss / (m - 1));
  }
  return sds;
}

EstimateReport run_impl(const RunInputs& in) {
  const Dataset& data = in.data;
  const AivgtConfig& cfg = in.cfg;
  data.validate();
  if (cfg.treatment == cfg.outcome) throw input_error("treatment and outcome must differ");
  data.col(cfg.treatment);  // both must resolve
  data.col(cfg.outcome);
  if (data.n() <= data.p() + 5) throw input_error("run requires n > p + 5");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw input_error("alpha must lie in (0,1)");

  EstimateReport report;
  report.config = cfg;
  report.shared_conditioning = in.shared;

  // 1. obtain the PAG
  if (cfg.graph) {
    report.graph = *cfg.graph;
    if (report.graph.kind() != GraphKind::Pag) throw input_error("pre-learned graph must be a PAG");
    for (const auto& col : data.columns) report.graph.require(col);
  } else if (data.p() < 3) {
    // treatment and outcome alone: nothing to learn, no candidates possible
    MixedGraph trivial(GraphKind::Pag);
    for (const auto& col : data.columns) trivial.add_node(col);
    trivial.set_edge(trivial.require(cfg.treatment), trivial.require(cfg.outcome), Mark::Circle,
                     Mark::Circle);
    report.graph = std::move(trivial);
  } else {
    CiBackend backend = cfg.oracle_dag ? CiBackend::oracle(*cfg.oracle_dag)
                                       : CiBackend::fisher_z(cov_matrix(data));
    LearnerConfig lc = cfg.learner;
    lc.alpha = cfg.alpha;
    LearnResult lr = learn_pag(backend, data.columns, lc);
    report.graph = std::move(lr.pag);
    for (const auto& wmsg : lr.warnings) report.warnings.push_back(wmsg);
  }
  const MixedGraph& pag = report.graph;
  const int w = pag.require(cfg.treatment);
  const int y = pag.require(cfg.outcome);

  // 2. candidates
  NodeSet cand_idx = candidate_aivs(pag, w, y);
  std::vector<std::string> cand;
  for (int v : cand_idx) cand.push_back(pag.name(v));
  std::sort(cand.begin(), cand.end());
  report.candidates = cand;
  if (cand.size() <= 1) {
    report.na_reason = NaReason::TooFewCandidates;
    return report;
  }

  // 3. conditioning sets (per candidate, or per pair for the baseline)
  const int ncand = static_cast<int>(cand.size());
  std::vector<std::vector<std::string>> cand_z(ncand);
  std::vector<std::optional<EffectEstimate>> cand_beta(ncand);
  std::vector<std::string> cand_error(ncand);

  std::vector<std::string> covariates;  // all columns except w, y
  for (const auto& colname : data.columns)
    if (colname != cfg.treatment && colname != cfg.outcome) covariates.push_back(colname);
  std::sort(covariates.begin(), covariates.end());

  if (!in.shared) {
    for (int i = 0; i < ncand; ++i) {
      NodeSet z = conditioning_set(pag, pag.require(cand[i]), w, y);
      for (int v : z) cand_z[i].push_back(pag.name(v));
      std::sort(cand_z[i].begin(), cand_z[i].end());
      try {
        cand_beta[i] = tsls(data, cfg.treatment, cfg.outcome, cand[i], cand_z[i]);
      } catch (const error& e) {
        cand_error[i] = e.what();
      }
    }
  }

  // 4. pair plans
  struct PairWork {
    int i, j;
    std::vector<std::string> z_i, z_j;
    std::optional<EffectEstimate> beta_i, beta_j;
    std::string error;
  };
  std::vector<PairWork> work;
  for (int i = 0; i < ncand; ++i)
    for (int j = i + 1; j < ncand; ++j) {
      PairWork pw;
      pw.i = i;
      pw.j = j;
      if (in.shared) {
        std::vector<std::string> z;
        for (const auto& colname : covariates)
          if (colname != cand[i] && colname != cand[j]) z.push_back(colname);
        pw.z_i = pw.z_j = z;
        try {
          pw.beta_i = tsls(data, cfg.treatment, cfg.outcome, cand[i], z);
          pw.beta_j = tsls(data, cfg.treatment, cfg.outcome, cand[j], z);
        } catch (const error& e) {
          pw.error = e.what();
        }
      } else {
        pw.z_i = cand_z[i];
        pw.z_j = cand_z[j];
        pw.beta_i = cand_beta[i];
        pw.beta_j = cand_beta[j];
        if (!cand_error[i].empty())
          pw.error = cand[i] + ": " + cand_error[i];
        else if (!cand_error[j].empty())
          pw.error = cand[j] + ": " + cand_error[j];
      }
      work.push_back(std::move(pw));
    }

  // 5. covariance over the columns the tetrads touch
  std::vector<std::string> used;
  {
    std::set<std::string> u{cfg.treatment, cfg.outcome};
    for (const auto& c : cand) u.insert(c);
    for (const auto& pw : work) {
      u.insert(pw.z_i.begin(), pw.z_i.end());
      u.insert(pw.z_j.begin(), pw.z_j.end());
    }
    used.assign(u.begin(), u.end());
  }
  CovMatrix cov = cov_matrix(data, used);
  auto zset = [&](const std::vector<std::string>& names) {
    NodeSet z;
    for (const auto& nm : names) set_insert(z, cov.col(nm));
    return z;
  };
  const int cw = cov.col(cfg.treatment);
  const int cy = cov.col(cfg.outcome);

  // 6. tetrad screen; the bootstrap shares one set of draws across pairs
  std::vector<double> boot_sd;
  if (cfg.tetrad_variance == TetradVariance::Bootstrap) {
    std::vector<std::pair<NodeSet, NodeSet>> sides;
    std::vector<std::tuple<int, int, int, int>> cols;
    for (const auto& pw : work) {
      sides.emplace_back(zset(pw.z_i), zset(pw.z_j));
      cols.emplace_back(cov.col(cand[pw.i]), cov.col(cand[pw.j]), cw, cy);
    }
    boot_sd = bootstrap_tau_sd(data, used, sides, cols, cfg.bootstrap_reps, cfg.seed);
  }

  for (size_t q = 0; q < work.size(); ++q) {
    const PairWork& pw = work[q];
    CandidatePair rec;
    rec.s_i = cand[pw.i];
    rec.s_j = cand[pw.j];
    rec.z_i = pw.z_i;
    rec.z_j = pw.z_j;
    rec.error = pw.error;

    if (rec.error.empty()) {
      try {
        const int csi = cov.col(rec.s_i), csj = cov.col(rec.s_j);
        const NodeSet zi = zset(pw.z_i), zj = zset(pw.z_j);
        SidePartials a = side_partials(cov, csi, cw, cy, zi);
        SidePartials b = side_partials(cov, csj, cw, cy, zj);
        rec.tau = a.with_y * b.with_w - a.with_w * b.with_y;
        rec.epsilon = std::abs(rec.tau);
        const double ri = a.with_y / a.with_w;
        const double rj = b.with_y / b.with_w;
        rec.epsilon_scaled = std::abs(ri - rj);

        if (cfg.tetrad_variance == TetradVariance::Wishart) {
          TetradResult wishart = tetrad_test_wishart(cov, csi, csj, cw, cy, zi, zj, cfg.alpha);
          rec.tetrad_sd = wishart.sd;
          rec.p_value = wishart.p_value;
          rec.passed = wishart.accepted;
        } else {
          if (boot_sd[q] <= 0.0)
            throw singular_conditioning_error("bootstrap variance unavailable for this pair");
          rec.tetrad_sd = boot_sd[q];
          rec.p_value = normal_two_sided_p(rec.tau / rec.tetrad_sd);
          rec.passed = rec.p_value > cfg.alpha;
          // the closed form is a diagnostic here; its failure is not disqualifying
          try {
            TetradResult wishart = tetrad_test_wishart(cov, csi, csj, cw, cy, zi, zj, cfg.alpha);
            rec.variance_modes_disagree = rec.passed != wishart.accepted;
          } catch (const error&) {
            rec.variance_modes_disagree = false;
          }
          if (rec.variance_modes_disagree)
            report.warnings.push_back("tetrad variance modes disagree on pair (" + rec.s_i +
                                      ", " + rec.s_j + ")");
        }

        rec.beta_i = pw.beta_i->beta;
        rec.beta_j = pw.beta_j->beta;
        rec.weak_instrument_i = pw.beta_i->weak_instrument;
        rec.weak_instrument_j = pw.beta_j->weak_instrument;
        rec.delta = std::abs(rec.beta_i - rec.beta_j);
        rec.lambda = std::abs(rec.epsilon - rec.delta);
      } catch (const error& e) {
        rec.error = e.what();
        rec.passed = false;
      }
    }
    report.all_pairs.push_back(std::move(rec));
  }

  // 7. minimum-lambda passing pair, ties lexicographic
  const CandidatePair* best = nullptr;
  for (const auto& pr : report.all_pairs) {
    if (!pr.error.empty() || !pr.passed) continue;
    if (!best || std::tie(pr.lambda, pr.s_i, pr.s_j) < std::tie(best->lambda, best->s_i, best->s_j))
      best = &pr;
  }
  if (!best) {
    report.na_reason = NaReason::NoPairPassed;
    return report;
  }
  report.estimated = true;
  report.chosen = *best;
  report.beta = 0.5 * (best->beta_i + best->beta_j);
  return report;
}

}  // namespace

EstimateReport run_aivgt(const Dataset& data, const AivgtConfig& cfg) {
  return run_impl(RunInputs{data, cfg, /*shared=*/false});
}

EstimateReport run_shared_conditioning_baseline(const Dataset& data, const AivgtConfig& cfg) {
  return run_impl(RunInputs{data, cfg, /*shared=*/true});
}

}  // namespace aivgt
