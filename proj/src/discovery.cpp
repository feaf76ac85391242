#include "aivgt/discovery.hpp"

#include <algorithm>
#include <set>

#include "aivgt/errors.hpp"

namespace aivgt {

// ---- backend ---------------------------------------------------------------

CiBackend CiBackend::fisher_z(CovMatrix cov) {
  CiBackend b;
  b.cov_ = std::move(cov);
  return b;
}

CiBackend CiBackend::oracle(Dag truth) {
  CiBackend b;
  b.truth_ = std::move(truth);
  return b;
}

double CiBackend::independence_p(const std::string& a, const std::string& b,
                                 const std::vector<std::string>& z) const {
  if (truth_) {
    NodeSet zi;
    for (const auto& name : z) set_insert(zi, truth_->require(name));
    return d_separated(*truth_, truth_->require(a), truth_->require(b), zi) ? 1.0 : 0.0;
  }
  NodeSet zi;
  for (const auto& name : z) set_insert(zi, cov_->col(name));
  return fisher_z_test(*cov_, cov_->col(a), cov_->col(b), zi).p_value;
}

// ---- learner ---------------------------------------------------------------

namespace {

// All work happens on indices into a name-sorted column list.
struct Learner {
  const CiBackend& backend;
  LearnerConfig cfg;
  std::vector<std::string> names;  // sorted
  int p = 0;

  std::vector<std::vector<bool>> adj;
  // sepset[a][b]: witness separating set (sorted indices), valid when separated[a][b]
  std::vector<std::vector<NodeSet>> sepset;
  std::vector<std::vector<bool>> separated;
  MixedGraph pag{GraphKind::Pag};
  std::vector<std::string> warnings;

  explicit Learner(const CiBackend& be, std::vector<std::string> sorted_names,
                   const LearnerConfig& config)
      : backend(be), cfg(config), names(std::move(sorted_names)) {
    p = static_cast<int>(names.size());
    adj.assign(p, std::vector<bool>(p, false));
    sepset.assign(p, std::vector<NodeSet>(p));
    separated.assign(p, std::vector<bool>(p, false));
    for (const auto& n : names) pag.add_node(n);
  }

  bool ci(int a, int b, const NodeSet& z) {
    std::vector<std::string> zn;
    zn.reserve(z.size());
    for (int v : z) zn.push_back(names[v]);
    return backend.independence_p(names[a], names[b], zn) > cfg.alpha;
  }

  NodeSet neighbors_of(int v) const {
    NodeSet out;
    for (int u = 0; u < p; ++u)
      if (adj[v][u]) out.push_back(u);
    return out;
  }

  void record_sepset(int a, int b, const NodeSet& z) {
    separated[a][b] = separated[b][a] = true;
    sepset[a][b] = sepset[b][a] = z;
  }

  // First separating subset of `pool` (sizes ascending, lexicographic),
  // honouring the conditioning-size cap.
  std::optional<NodeSet> find_sepset_in(int a, int b, const NodeSet& pool, int max_size) {
    const int limit = std::min<int>(max_size, static_cast<int>(pool.size()));
    NodeSet subset;
    for (int k = 0; k <= limit; ++k) {
      subset.assign(k, 0);
      std::vector<int> idx(k);
      // lexicographic k-combinations of pool
      std::function<bool(int, int)> rec = [&](int depth, int start) -> bool {
        if (depth == k) {
          NodeSet z;
          for (int d = 0; d < k; ++d) z.push_back(pool[idx[d]]);
          if (ci(a, b, z)) {
            subset = z;
            return true;
          }
          return false;
        }
        for (int i = start; i <= static_cast<int>(pool.size()) - (k - depth); ++i) {
          idx[depth] = i;
          if (rec(depth + 1, i + 1)) return true;
        }
        return false;
      };
      if (rec(0, 0)) return subset;
    }
    return std::nullopt;
  }

  int cond_cap() const { return cfg.max_cond_size ? *cfg.max_cond_size : p; }

  // Level-wise PC-style skeleton; removals applied at the end of each level.
  void skeleton_phase() {
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) adj[a][b] = (a != b);

    bool truncated = false;
    for (int level = 0;; ++level) {
      if (level > cond_cap()) {
        // some pair may still have a big enough neighbourhood to warrant
        // deeper search; note the truncation once
        bool any = false;
        for (int a = 0; a < p && !any; ++a)
          for (int b = a + 1; b < p && !any; ++b)
            if (adj[a][b] &&
                static_cast<int>(neighbors_of(a).size()) - 1 >= level)
              any = true;
        if (any && !truncated) {
          warnings.push_back("skeleton search truncated at conditioning size " +
                             std::to_string(cond_cap()));
          truncated = true;
        }
        break;
      }
      std::vector<NodeSet> snapshot(p);
      for (int v = 0; v < p; ++v) snapshot[v] = neighbors_of(v);

      bool level_feasible = false;
      std::vector<std::pair<int, int>> to_remove;
      for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
          if (!adj[a][b]) continue;
          NodeSet pool_a = snapshot[a];
          pool_a.erase(std::remove(pool_a.begin(), pool_a.end(), b), pool_a.end());
          NodeSet pool_b = snapshot[b];
          pool_b.erase(std::remove(pool_b.begin(), pool_b.end(), a), pool_b.end());
          if (static_cast<int>(pool_a.size()) >= level ||
              static_cast<int>(pool_b.size()) >= level)
            level_feasible = true;

          std::optional<NodeSet> found;
          if (static_cast<int>(pool_a.size()) >= level)
            found = find_level_sepset(a, b, pool_a, level);
          if (!found && static_cast<int>(pool_b.size()) >= level)
            found = find_level_sepset(a, b, pool_b, level);
          if (found) {
            record_sepset(a, b, *found);
            to_remove.emplace_back(a, b);
          }
        }
      }
      for (auto [a, b] : to_remove) adj[a][b] = adj[b][a] = false;
      if (!level_feasible) break;
    }
  }

  // Exactly-size-`level` subsets, lexicographic.
  std::optional<NodeSet> find_level_sepset(int a, int b, const NodeSet& pool, int level) {
    if (static_cast<int>(pool.size()) < level) return std::nullopt;
    std::optional<NodeSet> result;
    std::vector<int> idx(level);
    std::function<bool(int, int)> rec = [&](int depth, int start) -> bool {
      if (depth == level) {
        NodeSet z;
        for (int d = 0; d < level; ++d) z.push_back(pool[idx[d]]);
        if (ci(a, b, z)) {
          result = z;
          return true;
        }
        return false;
      }
      for (int i = start; i <= static_cast<int>(pool.size()) - (level - depth); ++i) {
        idx[depth] = i;
        if (rec(depth + 1, i + 1)) return true;
      }
      return false;
    };
    rec(0, 0);
    return result;
  }

  void sync_pag_from_adj() {
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b) {
        bool has = pag.adjacent(a, b);
        if (adj[a][b] && !has) pag.set_edge(a, b, Mark::Circle, Mark::Circle);
        if (!adj[a][b] && has) pag.remove_edge(a, b);
        if (adj[a][b] && has) {
          pag.set_mark(a, b, Mark::Circle);
          pag.set_mark(b, a, Mark::Circle);
        }
      }
  }

  void orient_colliders() {
    for (int c = 0; c < p; ++c) {
      NodeSet nbr = neighbors_of(c);
      for (size_t i = 0; i < nbr.size(); ++i)
        for (size_t j = i + 1; j < nbr.size(); ++j) {
          int a = nbr[i], b = nbr[j];
          if (adj[a][b]) continue;       // shielded
          if (!separated[a][b]) continue;
          if (!set_contains(sepset[a][b], c)) {
            pag.set_mark(c, a, Mark::Arrow);
            pag.set_mark(c, b, Mark::Arrow);
          }
        }
    }
  }

  // Possible-D-SEP of v: nodes reachable along paths whose interior
  // triples are colliders or shielded.
  NodeSet possible_d_sep(int v) const {
    std::set<std::pair<int, int>> seen;  // (prev, cur)
    std::vector<std::pair<int, int>> stack;
    NodeSet out;
    for (int u = 0; u < p; ++u)
      if (adj[v][u]) {
        seen.emplace(v, u);
        stack.emplace_back(v, u);
        set_insert(out, u);
      }
    while (!stack.empty()) {
      auto [prev, cur] = stack.back();
      stack.pop_back();
      for (int nxt = 0; nxt < p; ++nxt) {
        if (nxt == cur || nxt == prev || nxt == v || !adj[cur][nxt]) continue;
        const bool collider = pag.mark_at(cur, prev) == Mark::Arrow &&
                              pag.mark_at(cur, nxt) == Mark::Arrow;
        const bool shielded = adj[prev][nxt];
        if (!collider && !shielded) continue;
        if (seen.emplace(cur, nxt).second) {
          stack.emplace_back(cur, nxt);
          set_insert(out, nxt);
        }
      }
    }
    return out;
  }

  void possible_d_sep_phase() {
    std::vector<NodeSet> pds(p);
    for (int v = 0; v < p; ++v) pds[v] = possible_d_sep(v);
    for (int a = 0; a < p; ++a) {
      for (int b = a + 1; b < p; ++b) {
        if (!adj[a][b]) continue;
        NodeSet pool_a = set_minus(pds[a], make_set({a, b}));
        NodeSet pool_b = set_minus(pds[b], make_set({a, b}));
        std::optional<NodeSet> found = find_sepset_in(a, b, pool_a, cond_cap());
        if (!found) found = find_sepset_in(a, b, pool_b, cond_cap());
        if (found) {
          record_sepset(a, b, *found);
          adj[a][b] = adj[b][a] = false;
        }
      }
    }
  }

  // ---- final orientation rules -------------------------------------------

  bool any_arrow_into(int v, int from) const { return pag.mark_at(v, from) == Mark::Arrow; }

  bool directed_edge(int a, int b) const {  // a -> b
    return adj[a][b] && pag.mark_at(a, b) == Mark::Tail && pag.mark_at(b, a) == Mark::Arrow;
  }

  bool rule_r1() {
    bool changed = false;
    for (int b = 0; b < p; ++b)
      for (int a = 0; a < p; ++a) {
        if (!adj[a][b] || pag.mark_at(b, a) != Mark::Arrow) continue;  // a *-> b
        for (int c = 0; c < p; ++c) {
          if (c == a || c == b || !adj[b][c] || adj[a][c]) continue;
          if (pag.mark_at(b, c) != Mark::Circle) continue;  // b o-* c
          pag.set_mark(b, c, Mark::Tail);
          pag.set_mark(c, b, Mark::Arrow);
          changed = true;
        }
      }
    return changed;
  }

  bool rule_r2() {
    bool changed = false;
    for (int a = 0; a < p; ++a)
      for (int c = 0; c < p; ++c) {
        if (a == c || !adj[a][c] || pag.mark_at(c, a) != Mark::Circle) continue;  // a *-o c
        for (int b = 0; b < p; ++b) {
          if (b == a || b == c || !adj[a][b] || !adj[b][c]) continue;
          const bool chain1 = directed_edge(a, b) && pag.mark_at(c, b) == Mark::Arrow;
          const bool chain2 = pag.mark_at(b, a) == Mark::Arrow && directed_edge(b, c);
          if (chain1 || chain2) {
            pag.set_mark(c, a, Mark::Arrow);
            changed = true;
            break;
          }
        }
      }
    return changed;
  }

  bool rule_r3() {
    bool changed = false;
    for (int b = 0; b < p; ++b)
      for (int d = 0; d < p; ++d) {
        if (b == d || !adj[d][b] || pag.mark_at(b, d) != Mark::Circle) continue;  // d *-o b
        bool fired = false;
        for (int a = 0; a < p && !fired; ++a) {
          if (a == b || a == d || !adj[a][b] || !adj[a][d]) continue;
          if (pag.mark_at(b, a) != Mark::Arrow) continue;      // a *-> b
          if (pag.mark_at(d, a) != Mark::Circle) continue;     // a *-o d
          for (int c = 0; c < p && !fired; ++c) {
            if (c == a || c == b || c == d) continue;
            if (adj[a][c]) continue;                           // a, c non-adjacent
            if (!adj[c][b] || !adj[c][d]) continue;
            if (pag.mark_at(b, c) != Mark::Arrow) continue;    // c *-> b
            if (pag.mark_at(d, c) != Mark::Circle) continue;   // c *-o d  (d o-* c)
            pag.set_mark(b, d, Mark::Arrow);
            changed = true;
            fired = true;
          }
        }
      }
    return changed;
  }

  // Discriminating paths <theta, ..., alpha, beta, gamma> for beta.
  bool rule_r4() {
    bool changed = false;
    for (int b = 0; b < p; ++b) {
      for (int c = 0; c < p; ++c) {
        if (b == c || !adj[b][c] || pag.mark_at(b, c) != Mark::Circle) continue;  // b o-* c
        // search backwards from beta=b toward theta
        // state: path ... u, v with all interior nodes colliders in Pa(c)
        std::vector<std::vector<int>> stack;
        for (int a = 0; a < p; ++a) {
          if (a == b || a == c || !adj[a][b]) continue;
          if (pag.mark_at(a, b) != Mark::Arrow) continue;  // collider side toward b
          if (!directed_edge(a, c)) continue;              // a must be a parent of c
          stack.push_back({c, b, a});
        }
        bool fired = false;
        while (!stack.empty() && !fired) {
          std::vector<int> path = stack.back();
          stack.pop_back();
          int v = path.back();
          int u = path[path.size() - 2];
          for (int t = 0; t < p; ++t) {
            if (t == v || t == u || t == b || t == c) continue;
            if (std::find(path.begin(), path.end(), t) != path.end()) continue;
            if (!adj[t][v]) continue;
            if (pag.mark_at(v, t) != Mark::Arrow) continue;  // v must stay a collider
            if (!adj[t][c]) {
              // t is theta: discriminating path found; alpha sits next to beta
              apply_r4(t, path[2], b, c);
              changed = true;
              fired = true;
              break;
            }
            // continue only through colliders that are parents of c
            if (pag.mark_at(t, v) == Mark::Arrow && directed_edge(t, c)) {
              auto next = path;
              next.push_back(t);
              stack.push_back(next);
            }
          }
        }
      }
    }
    return changed;
  }

  void apply_r4(int theta, int alpha, int b, int c) {
    const bool b_in_sepset = separated[theta][c] && set_contains(sepset[theta][c], b);
    if (b_in_sepset) {
      pag.set_mark(b, c, Mark::Tail);
      pag.set_mark(c, b, Mark::Arrow);
    } else {
      pag.set_mark(b, alpha, Mark::Arrow);
      pag.set_mark(b, c, Mark::Arrow);
      pag.set_mark(c, b, Mark::Arrow);
    }
  }

  // Uncovered possibly-directed path from a to c whose second node is not
  // adjacent to c; used by R9.
  bool has_uncovered_pd_path_avoiding_edge(int a, int c) {
    for (int first = 0; first < p; ++first) {
      if (first == a || first == c || !adj[a][first] || adj[first][c]) continue;
      if (pag.mark_at(a, first) == Mark::Arrow) continue;
      if (ucp_pd_search(a, first, c)) return true;
    }
    return false;
  }

  // DFS for an uncovered pd path a, first, ..., target.
  bool ucp_pd_search(int a, int first, int target) {
    std::vector<int> path{a, first};
    return ucp_pd_dfs(path, target);
  }

  bool ucp_pd_dfs(std::vector<int>& path, int target) {
    int cur = path.back();
    if (cur == target) return true;
    int prev = path[path.size() - 2];
    for (int nxt = 0; nxt < p; ++nxt) {
      if (nxt == cur || !adj[cur][nxt]) continue;
      if (std::find(path.begin(), path.end(), nxt) != path.end()) continue;
      if (adj[prev][nxt]) continue;                       // must stay uncovered
      if (pag.mark_at(cur, nxt) == Mark::Arrow) continue; // must stay possibly directed
      path.push_back(nxt);
      if (ucp_pd_dfs(path, target)) return true;
      path.pop_back();
    }
    return false;
  }

  bool rule_r8() {
    bool changed = false;
    for (int a = 0; a < p; ++a)
      for (int c = 0; c < p; ++c) {
        if (a == c || !adj[a][c]) continue;
        if (pag.mark_at(a, c) != Mark::Circle || pag.mark_at(c, a) != Mark::Arrow) continue;
        for (int b = 0; b < p; ++b) {
          if (b == a || b == c || !adj[a][b] || !adj[b][c]) continue;
          const bool left = directed_edge(a, b) ||
                            (pag.mark_at(a, b) == Mark::Tail && pag.mark_at(b, a) == Mark::Circle);
          if (left && directed_edge(b, c)) {
            pag.set_mark(a, c, Mark::Tail);
            changed = true;
            break;
          }
        }
      }
    return changed;
  }

  bool rule_r9() {
    bool changed = false;
    for (int a = 0; a < p; ++a)
      for (int c = 0; c < p; ++c) {
        if (a == c || !adj[a][c]) continue;
        if (pag.mark_at(a, c) != Mark::Circle || pag.mark_at(c, a) != Mark::Arrow) continue;
        if (has_uncovered_pd_path_avoiding_edge(a, c)) {
          pag.set_mark(a, c, Mark::Tail);
          changed = true;
        }
      }
    return changed;
  }

  // Collects second nodes of uncovered pd paths from a to target.
  void ucp_second_nodes(int a, int target, NodeSet& out) {
    for (int first = 0; first < p; ++first) {
      if (first == a || !adj[a][first]) continue;
      if (pag.mark_at(a, first) == Mark::Arrow) continue;
      if (first == target) {
        set_insert(out, first);
        continue;
      }
      if (ucp_pd_search(a, first, target)) set_insert(out, first);
    }
  }

  bool rule_r10() {
    bool changed = false;
    for (int a = 0; a < p; ++a)
      for (int c = 0; c < p; ++c) {
        if (a == c || !adj[a][c]) continue;
        if (pag.mark_at(a, c) != Mark::Circle || pag.mark_at(c, a) != Mark::Arrow) continue;
        // parents beta, theta of c
        NodeSet parents;
        for (int v = 0; v < p; ++v)
          if (v != c && adj[v][c] && directed_edge(v, c)) parents.push_back(v);
        bool fired = false;
        for (size_t i = 0; i < parents.size() && !fired; ++i)
          for (size_t j = 0; j < parents.size() && !fired; ++j) {
            if (i == j) continue;
            int beta = parents[i], theta = parents[j];
            if (beta == a || theta == a) continue;
            NodeSet mu, omega;
            ucp_second_nodes(a, beta, mu);
            ucp_second_nodes(a, theta, omega);
            for (int m : mu) {
              for (int o : omega) {
                if (m == o || adj[m][o]) continue;
                pag.set_mark(a, c, Mark::Tail);
                changed = true;
                fired = true;
                break;
              }
              if (fired) break;
            }
          }
      }
    return changed;
  }

  void orientation_rules() {
    for (;;) {
      bool changed = false;
      changed |= rule_r1();
      changed |= rule_r2();
      changed |= rule_r3();
      changed |= rule_r4();
      changed |= rule_r8();
      changed |= rule_r9();
      changed |= rule_r10();
      if (!changed) break;
    }
  }

  void run() {
    skeleton_phase();
    sync_pag_from_adj();
    orient_colliders();
    possible_d_sep_phase();
    sync_pag_from_adj();  // resets every surviving edge to o-o
    orient_colliders();
    orientation_rules();
  }
};

}  // namespace

LearnResult learn_pag(const CiBackend& backend, const std::vector<std::string>& cols,
                      const LearnerConfig& cfg) {
  if (cols.size() < 3) throw input_error("learn_pag needs at least three columns");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
  {
    std::set<std::string> uniq(cols.begin(), cols.end());
    if (uniq.size() != cols.size()) throw input_error("duplicate columns passed to learn_pag");
  }
  if (!backend.is_oracle()) {
    const long n = backend.sample_size();
    const int cap = cfg.max_cond_size ? *cfg.max_cond_size : static_cast<int>(cols.size()) - 2;
    if (n <= cap + 3) throw input_error("sample too small for the requested conditioning size");
  }

  std::vector<std::string> sorted_cols(cols);
  std::sort(sorted_cols.begin(), sorted_cols.end());

  Learner learner(backend, sorted_cols, cfg);
  learner.run();

  // re-emit in the caller's column order
  LearnResult out;
  MixedGraph pag(GraphKind::Pag);
  for (const auto& c : cols) pag.add_node(c);
  for (const auto& [a, b, at_a, at_b] : learner.pag.edges()) {
    int na = pag.require(learner.names[a]);
    int nb = pag.require(learner.names[b]);
    pag.set_edge(na, nb, at_a, at_b);
  }
  out.pag = std::move(pag);
  for (int a = 0; a < learner.p; ++a)
    for (int b = a + 1; b < learner.p; ++b) {
      if (!learner.separated[a][b]) continue;
      std::vector<std::string> z;
      for (int v : learner.sepset[a][b]) z.push_back(learner.names[v]);
      out.sepsets[{learner.names[a], learner.names[b]}] = z;
    }
  out.warnings = learner.warnings;
  return out;
}

}  // namespace aivgt
