#include "aivgt/graph.hpp"

#include <deque>
#include <tuple>

#include "aivgt/errors.hpp"

namespace aivgt {

// ---- Dag ---------------------------------------------------------------

int Dag::add_node(std::string name, bool observed) {
  if (name.empty()) throw input_error("node name must be non-empty");
  if (find(name)) throw input_error("duplicate node name: " + name);
  names_.push_back(std::move(name));
  observed_.push_back(observed);
  parents_.emplace_back();
  children_.emplace_back();
  return node_count() - 1;
}

void Dag::check_node(int v) const {
  if (v < 0 || v >= node_count()) throw input_error("unknown node index " + std::to_string(v));
}

bool Dag::reaches(int from, int to) const {
  if (from == to) return true;
  std::vector<bool> seen(node_count(), false);
  std::deque<int> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int c : children_[u]) {
      if (c == to) return true;
      if (!seen[c]) {
        seen[c] = true;
        queue.push_back(c);
      }
    }
  }
  return false;
}

void Dag::add_edge(int parent, int child) {
  check_node(parent);
  check_node(child);
  if (parent == child) throw input_error("self loop on " + names_[parent]);
  if (has_edge(parent, child) || has_edge(child, parent))
    throw input_error("duplicate edge between " + names_[parent] + " and " + names_[child]);
  if (reaches(child, parent))
    throw input_error("edge " + names_[parent] + " -> " + names_[child] + " creates a cycle");
  set_insert(children_[parent], child);
  set_insert(parents_[child], parent);
  ++edge_count_;
}

void Dag::add_edge(std::string_view parent, std::string_view child) {
  add_edge(require(parent), require(child));
}

const std::string& Dag::name(int v) const {
  check_node(v);
  return names_[v];
}

bool Dag::observed(int v) const {
  check_node(v);
  return observed_[v];
}

std::optional<int> Dag::find(std::string_view name) const {
  for (int i = 0; i < node_count(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

int Dag::require(std::string_view name) const {
  auto v = find(name);
  if (!v) throw input_error("unknown node: " + std::string(name));
  return *v;
}

bool Dag::has_edge(int parent, int child) const {
  check_node(parent);
  check_node(child);
  return set_contains(children_[parent], child);
}

const NodeSet& Dag::parents(int v) const {
  check_node(v);
  return parents_[v];
}

const NodeSet& Dag::children(int v) const {
  check_node(v);
  return children_[v];
}

NodeSet Dag::observed_nodes() const {
  NodeSet out;
  for (int i = 0; i < node_count(); ++i)
    if (observed_[i]) out.push_back(i);
  return out;
}

// ---- MixedGraph ----------------------------------------------------------

int MixedGraph::add_node(std::string name) {
  if (name.empty()) throw input_error("node name must be non-empty");
  if (find(name)) throw input_error("duplicate node name: " + name);
  names_.push_back(std::move(name));
  nbrs_.emplace_back();
  marks_.emplace_back();
  return node_count() - 1;
}

void MixedGraph::check_node(int v) const {
  if (v < 0 || v >= node_count()) throw input_error("unknown node index " + std::to_string(v));
}

int MixedGraph::slot(int at, int other) const {
  const NodeSet& n = nbrs_[at];
  auto it = std::lower_bound(n.begin(), n.end(), other);
  if (it == n.end() || *it != other) return -1;
  return static_cast<int>(it - n.begin());
}

void MixedGraph::set_edge(int a, int b, Mark mark_at_a, Mark mark_at_b) {
  check_node(a);
  check_node(b);
  if (a == b) throw input_error("self loop on " + names_[a]);
  if (adjacent(a, b)) remove_edge(a, b);
  {
    auto it = std::lower_bound(nbrs_[a].begin(), nbrs_[a].end(), b);
    auto pos = it - nbrs_[a].begin();
    nbrs_[a].insert(it, b);
    marks_[a].insert(marks_[a].begin() + pos, mark_at_a);
  }
  {
    auto it = std::lower_bound(nbrs_[b].begin(), nbrs_[b].end(), a);
    auto pos = it - nbrs_[b].begin();
    nbrs_[b].insert(it, a);
    marks_[b].insert(marks_[b].begin() + pos, mark_at_b);
  }
}

void MixedGraph::remove_edge(int a, int b) {
  int sa = slot(a, b), sb = slot(b, a);
  if (sa < 0 || sb < 0) throw input_error("no edge between " + names_[a] + " and " + names_[b]);
  nbrs_[a].erase(nbrs_[a].begin() + sa);
  marks_[a].erase(marks_[a].begin() + sa);
  nbrs_[b].erase(nbrs_[b].begin() + sb);
  marks_[b].erase(marks_[b].begin() + sb);
}

const std::string& MixedGraph::name(int v) const {
  check_node(v);
  return names_[v];
}

std::optional<int> MixedGraph::find(std::string_view name) const {
  for (int i = 0; i < node_count(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

int MixedGraph::require(std::string_view name) const {
  auto v = find(name);
  if (!v) throw input_error("unknown node: " + std::string(name));
  return *v;
}

bool MixedGraph::adjacent(int a, int b) const {
  check_node(a);
  check_node(b);
  return slot(a, b) >= 0;
}

Mark MixedGraph::mark_at(int at, int other) const {
  check_node(at);
  check_node(other);
  int s = slot(at, other);
  if (s < 0) throw input_error("no edge between " + names_[at] + " and " + names_[other]);
  return marks_[at][s];
}

void MixedGraph::set_mark(int at, int other, Mark m) {
  check_node(at);
  check_node(other);
  int s = slot(at, other);
  if (s < 0) throw input_error("no edge between " + names_[at] + " and " + names_[other]);
  marks_[at][s] = m;
}

const NodeSet& MixedGraph::neighbors(int v) const {
  check_node(v);
  return nbrs_[v];
}

int MixedGraph::edge_count() const {
  int total = 0;
  for (const auto& n : nbrs_) total += static_cast<int>(n.size());
  return total / 2;
}

std::vector<std::tuple<int, int, Mark, Mark>> MixedGraph::edges() const {
  std::vector<std::tuple<int, int, Mark, Mark>> out;
  for (int a = 0; a < node_count(); ++a) {
    for (size_t i = 0; i < nbrs_[a].size(); ++i) {
      int b = nbrs_[a][i];
      if (a < b) out.emplace_back(a, b, marks_[a][i], mark_at(b, a));
    }
  }
  return out;
}

void MixedGraph::validate_mag() const {
  for (int v = 0; v < node_count(); ++v)
    for (Mark m : marks_[v])
      if (m == Mark::Circle)
        throw input_error("MAG may not contain circle marks (node " + names_[v] + ")");
  for (int a = 0; a < node_count(); ++a) {
    NodeSet an_a = ancestors(*this, {a});
    for (int b : nbrs_[a]) {
      // a *-> b with b an ancestor of a is a directed or almost directed cycle
      if (mark_at(b, a) == Mark::Arrow && b != a && set_contains(an_a, b))
        throw input_error("directed or almost directed cycle through " + names_[a] + " and " +
                          names_[b]);
    }
  }
}

// ---- separation ----------------------------------------------------------

namespace {

void check_sep_args(int n, int a, int b, const NodeSet& z) {
  auto check = [n](int v) {
    if (v < 0 || v >= n) throw input_error("unknown node index " + std::to_string(v));
  };
  check(a);
  check(b);
  for (int v : z) check(v);
  if (a == b) throw input_error("separation query requires distinct endpoints");
  if (set_contains(z, a) || set_contains(z, b))
    throw input_error("conditioning set may not contain the endpoints");
}

// Reachability over (node, entered-with-arrowhead) states. The walk from a
// reaches b iff a and b are connected given z. `anz` holds z and all its
// ancestors (nodes with a descendant in z), used for the collider check.
struct SepSearch {
  int nodes = 0;
  std::vector<bool> in_z;
  std::vector<bool> in_anz;
  std::vector<bool> seen;  // 2 slots per node: [tail-entry, arrow-entry]

  explicit SepSearch(int n, const NodeSet& z, const NodeSet& anz)
      : nodes(n), in_z(n, false), in_anz(n, false), seen(2 * n, false) {
    for (int v : z) in_z[v] = true;
    for (int v : anz) in_anz[v] = true;
  }

  bool passes(int via, bool entered_arrow, bool leaves_arrow) const {
    const bool collider = entered_arrow && leaves_arrow;
    return collider ? in_anz[via] : !in_z[via];
  }
};

}  // namespace

bool d_separated(const Dag& g, int a, int b, const NodeSet& z) {
  check_sep_args(g.node_count(), a, b, z);
  SepSearch s(g.node_count(), z, ancestors(g, z));
  std::deque<std::pair<int, bool>> queue;
  auto push = [&](int v, bool arrow) {
    if (v == a) return;  // endpoints are not interior nodes
    if (!s.seen[2 * v + arrow]) {
      s.seen[2 * v + arrow] = true;
      queue.emplace_back(v, arrow);
    }
  };
  for (int c : g.children(a)) push(c, true);
  for (int p : g.parents(a)) push(p, false);
  while (!queue.empty()) {
    auto [x, entered_arrow] = queue.front();
    queue.pop_front();
    if (x == b) return false;
    // leaving toward a parent uses an edge with an arrowhead at x
    for (int p : g.parents(x))
      if (s.passes(x, entered_arrow, true)) push(p, false);
    for (int c : g.children(x))
      if (s.passes(x, entered_arrow, false)) push(c, true);
  }
  return true;
}

bool m_separated(const MixedGraph& g, int a, int b, const NodeSet& z) {
  if (g.kind() != GraphKind::Mag)
    throw input_error("m_separated is defined on MAGs only");
  check_sep_args(g.node_count(), a, b, z);
  SepSearch s(g.node_count(), z, ancestors(g, z));
  std::deque<std::pair<int, bool>> queue;
  auto push = [&](int v, bool arrow) {
    if (v == a) return;
    if (!s.seen[2 * v + arrow]) {
      s.seen[2 * v + arrow] = true;
      queue.emplace_back(v, arrow);
    }
  };
  for (int w : g.neighbors(a)) push(w, g.mark_at(w, a) == Mark::Arrow);
  while (!queue.empty()) {
    auto [x, entered_arrow] = queue.front();
    queue.pop_front();
    if (x == b) return false;
    for (int w : g.neighbors(x)) {
      const bool leaves_arrow = g.mark_at(x, w) == Mark::Arrow;
      if (s.passes(x, entered_arrow, leaves_arrow)) push(w, g.mark_at(w, x) == Mark::Arrow);
    }
  }
  return true;
}

// ---- ancestry ------------------------------------------------------------

namespace {

template <typename NextFn>
NodeSet closure(int n, const NodeSet& targets, NextFn&& next) {
  std::vector<bool> in(n, false);
  std::deque<int> queue;
  for (int t : targets) {
    if (t < 0 || t >= n) throw input_error("unknown node index " + std::to_string(t));
    if (!in[t]) {
      in[t] = true;
      queue.push_back(t);
    }
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    next(v, [&](int u) {
      if (!in[u]) {
        in[u] = true;
        queue.push_back(u);
      }
    });
  }
  NodeSet out;
  for (int v = 0; v < n; ++v)
    if (in[v]) out.push_back(v);
  return out;
}

}  // namespace

NodeSet ancestors(const Dag& g, const NodeSet& targets) {
  return closure(g.node_count(), targets, [&](int v, auto add) {
    for (int p : g.parents(v)) add(p);
  });
}

NodeSet descendants(const Dag& g, const NodeSet& targets) {
  return closure(g.node_count(), targets, [&](int v, auto add) {
    for (int c : g.children(v)) add(c);
  });
}

NodeSet ancestors(const MixedGraph& g, const NodeSet& targets) {
  return closure(g.node_count(), targets, [&](int v, auto add) {
    for (int u : g.neighbors(v))
      if (g.mark_at(u, v) == Mark::Tail && g.mark_at(v, u) == Mark::Arrow) add(u);
  });
}

NodeSet descendants(const MixedGraph& g, const NodeSet& targets) {
  return closure(g.node_count(), targets, [&](int v, auto add) {
    for (int u : g.neighbors(v))
      if (g.mark_at(v, u) == Mark::Tail && g.mark_at(u, v) == Mark::Arrow) add(u);
  });
}

NodeSet possible_ancestors(const MixedGraph& g, const NodeSet& targets) {
  // u joins when some edge u-x into the current set has no arrowhead at u.
  return closure(g.node_count(), targets, [&](int v, auto add) {
    for (int u : g.neighbors(v))
      if (g.mark_at(u, v) != Mark::Arrow) add(u);
  });
}

NodeSet possible_descendants(const MixedGraph& g, const NodeSet& targets) {
  return closure(g.node_count(), targets, [&](int v, auto add) {
    for (int u : g.neighbors(v))
      if (g.mark_at(v, u) != Mark::Arrow) add(u);
  });
}

NodeSet adjacents(const MixedGraph& g, int v) {
  return g.neighbors(v);
}

// ---- DAG -> MAG ------------------------------------------------------------

namespace {

// Inducing path relative to the latent nodes: every observed interior node
// is a collider and an ancestor of {a, b}; latent colliders must also be
// ancestors of {a, b}. Searched as reachability over entry-direction states.
bool inducing_path(const Dag& g, int a, int b, const std::vector<bool>& an_ab) {
  const int n = g.node_count();
  std::vector<bool> seen(2 * n, false);
  std::deque<std::pair<int, bool>> queue;
  auto push = [&](int v, bool arrow) {
    if (v == a) return;
    if (!seen[2 * v + arrow]) {
      seen[2 * v + arrow] = true;
      queue.emplace_back(v, arrow);
    }
  };
  for (int c : g.children(a)) push(c, true);
  for (int p : g.parents(a)) push(p, false);
  while (!queue.empty()) {
    auto [x, entered_arrow] = queue.front();
    queue.pop_front();
    if (x == b) return true;
    auto allowed = [&](bool leaves_arrow) {
      const bool collider = entered_arrow && leaves_arrow;
      if (g.observed(x)) return collider && an_ab[x];
      return !collider || an_ab[x];
    };
    for (int p : g.parents(x))
      if (allowed(true)) push(p, false);
    for (int c : g.children(x))
      if (allowed(false)) push(c, true);
  }
  return false;
}

}  // namespace

MixedGraph dag_to_mag(const Dag& g) {
  NodeSet obs = g.observed_nodes();
  if (obs.empty()) throw input_error("dag_to_mag requires at least one observed node");

  MixedGraph mag(GraphKind::Mag);
  std::vector<int> to_mag(g.node_count(), -1);
  for (int v : obs) to_mag[v] = mag.add_node(g.name(v));

  // per-node ancestor closure, reused for marks and inducing-path checks
  std::vector<NodeSet> an(g.node_count());
  for (int v : obs) an[v] = ancestors(g, {v});

  for (size_t i = 0; i < obs.size(); ++i) {
    for (size_t j = i + 1; j < obs.size(); ++j) {
      int a = obs[i], b = obs[j];
      std::vector<bool> an_ab(g.node_count(), false);
      for (int v : an[a]) an_ab[v] = true;
      for (int v : an[b]) an_ab[v] = true;
      if (!inducing_path(g, a, b, an_ab)) continue;
      Mark at_a = set_contains(an[b], a) ? Mark::Tail : Mark::Arrow;
      Mark at_b = set_contains(an[a], b) ? Mark::Tail : Mark::Arrow;
      mag.set_edge(to_mag[a], to_mag[b], at_a, at_b);
    }
  }
  return mag;
}

// ---- visibility ------------------------------------------------------------

bool is_visible(const MixedGraph& g, int a, int b) {
  if (g.kind() != GraphKind::Mag) throw input_error("is_visible is defined on MAGs only");
  if (!g.adjacent(a, b) || g.mark_at(a, b) != Mark::Tail || g.mark_at(b, a) != Mark::Arrow)
    throw input_error("is_visible requires a directed edge " + g.name(a) + " -> " + g.name(b));

  const NodeSet& adj_b = g.neighbors(b);
  auto outside = [&](int k) { return k != a && k != b && !set_contains(adj_b, k); };

  // first clause: some k outside Adj(b) with an edge into a
  for (int k : g.neighbors(a))
    if (outside(k) && g.mark_at(a, k) == Mark::Arrow) return true;

  // second clause: collider path k ... c -> a, every interior node a parent
  // of b. Interior nodes carry arrowheads on both sides; walk backwards from a.
  NodeSet pa_b;
  for (int u : g.neighbors(b))
    if (g.mark_at(u, b) == Mark::Tail && g.mark_at(b, u) == Mark::Arrow) set_insert(pa_b, u);

  std::vector<bool> reached(g.node_count(), false);
  std::deque<int> queue;
  for (int c : g.neighbors(a)) {
    if (c == b || !set_contains(pa_b, c)) continue;
    if (g.mark_at(a, c) == Mark::Arrow && g.mark_at(c, a) == Mark::Arrow) {
      reached[c] = true;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (int k : g.neighbors(c)) {
      if (k == a || k == b) continue;
      if (g.mark_at(c, k) != Mark::Arrow) continue;  // c must stay a collider
      if (outside(k)) return true;                   // k terminates the path
      if (!reached[k] && set_contains(pa_b, k) && g.mark_at(k, c) == Mark::Arrow) {
        reached[k] = true;
        queue.push_back(k);
      }
    }
  }
  return false;
}

// ---- instrument checks in a DAG --------------------------------------------

namespace {

Dag without_edge(const Dag& g, int w, int y) {
  Dag out;
  for (int v = 0; v < g.node_count(); ++v) out.add_node(g.name(v), g.observed(v));
  for (int v = 0; v < g.node_count(); ++v)
    for (int c : g.children(v))
      if (!(v == w && c == y)) out.add_edge(v, c);
  return out;
}

void check_iv_args(const Dag& g, int s, int w, int y, const NodeSet& z) {
  for (int v : {s, w, y})
    if (!g.observed(v)) throw input_error("instrument query nodes must be observed");
  if (s == w || s == y || w == y) throw input_error("s, w, y must be distinct");
  for (int v : z) {
    if (!g.observed(v)) throw input_error("conditioning set must be observed");
    if (v == s || v == w || v == y)
      throw input_error("conditioning set may not contain s, w or y");
  }
  if (!g.has_edge(w, y))
    throw input_error("edge " + g.name(w) + " -> " + g.name(y) + " is required");
}

}  // namespace

bool is_civ_in_dag(const Dag& g, int s, int w, int y, const NodeSet& z) {
  check_iv_args(g, s, w, y, z);
  if (d_separated(g, s, w, z)) return false;
  Dag cut = without_edge(g, w, y);
  if (!d_separated(cut, s, y, z)) return false;
  NodeSet de_y = descendants(g, {y});
  return set_intersect(z, de_y).empty();
}

bool is_aiv_in_dag(const Dag& g, int s, int w, int y, const NodeSet& z) {
  check_iv_args(g, s, w, y, z);
  NodeSet an = set_union(ancestors(g, {y}), ancestors(g, {s}));
  for (int v : z)
    if (!set_contains(an, v)) return false;
  return is_civ_in_dag(g, s, w, y, z);
}

}  // namespace aivgt
