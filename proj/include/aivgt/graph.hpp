#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aivgt/util.hpp"

namespace aivgt {

/// Directed acyclic graph over observed and latent nodes. Immutable once
/// built (add_* during construction only); all queries are pure.
class Dag {
 public:
  /// Adds a node; names must be unique. Returns the node index.
  int add_node(std::string name, bool observed = true);

  /// Adds parent -> child. Throws input_error on cycles, self loops and
  /// duplicate pairs (at most one edge per node pair).
  void add_edge(int parent, int child);
  void add_edge(std::string_view parent, std::string_view child);

  int node_count() const { return static_cast<int>(names_.size()); }
  const std::string& name(int v) const;
  bool observed(int v) const;
  std::optional<int> find(std::string_view name) const;
  int require(std::string_view name) const;  // throws input_error if missing

  bool has_edge(int parent, int child) const;
  const NodeSet& parents(int v) const;
  const NodeSet& children(int v) const;
  NodeSet observed_nodes() const;
  int edge_count() const { return edge_count_; }

 private:
  bool reaches(int from, int to) const;
  void check_node(int v) const;

  std::vector<std::string> names_;
  std::vector<bool> observed_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
  int edge_count_ = 0;
};

enum class Mark : unsigned char { Tail, Arrow, Circle };

enum class GraphKind : unsigned char { Mag, Pag };

/// Mixed graph with per-endpoint marks; represents a MAG or a PAG.
/// At most one edge per node pair.
class MixedGraph {
 public:
  explicit MixedGraph(GraphKind kind = GraphKind::Pag) : kind_(kind) {}

  int add_node(std::string name);
  /// Sets (or replaces) the edge a-b with the given endpoint marks.
  void set_edge(int a, int b, Mark mark_at_a, Mark mark_at_b);
  void remove_edge(int a, int b);

  GraphKind kind() const { return kind_; }
  void set_kind(GraphKind k) { kind_ = k; }
  int node_count() const { return static_cast<int>(names_.size()); }
  const std::string& name(int v) const;
  std::optional<int> find(std::string_view name) const;
  int require(std::string_view name) const;

  bool adjacent(int a, int b) const;
  /// Mark at endpoint `at` of the edge at-other; throws if the edge is absent.
  Mark mark_at(int at, int other) const;
  void set_mark(int at, int other, Mark m);
  /// Neighbors of v, sorted by index.
  const NodeSet& neighbors(int v) const;
  int edge_count() const;
  /// All edges as (a, b, mark_at_a, mark_at_b) with a < b, sorted.
  std::vector<std::tuple<int, int, Mark, Mark>> edges() const;

  /// Validates MAG invariants: no Circle marks, no directed or almost
  /// directed cycles. Throws input_error on violation. (Maximality is
  /// checked by tests, not here.)
  void validate_mag() const;

 private:
  void check_node(int v) const;
  int slot(int at, int other) const;  // -1 if absent

  GraphKind kind_;
  std::vector<std::string> names_;
  // marks_[v] aligned with nbrs_[v]: mark at v on the edge v-nbr.
  std::vector<NodeSet> nbrs_;
  std::vector<std::vector<Mark>> marks_;
};

// ---- queries on DAGs --------------------------------------------------

/// True iff every path between a and b is blocked by z (d-separation).
bool d_separated(const Dag& g, int a, int b, const NodeSet& z);

/// Ancestors of the target set, including the targets themselves.
NodeSet ancestors(const Dag& g, const NodeSet& targets);
NodeSet descendants(const Dag& g, const NodeSet& targets);

/// Conditional-instrument test: s is d-connected to w given z, d-separated
/// from y given z once w->y is removed, and z avoids descendants of y.
/// Requires the edge w->y to be present.
bool is_civ_in_dag(const Dag& g, int s, int w, int y, const NodeSet& z);

/// is_civ_in_dag plus the ancestral restriction: z is contained in the
/// observed ancestors of y or of s.
bool is_aiv_in_dag(const Dag& g, int s, int w, int y, const NodeSet& z);

// ---- queries on mixed graphs ------------------------------------------

/// True iff every path between a and b is m-blocked by z. MAGs only.
bool m_separated(const MixedGraph& g, int a, int b, const NodeSet& z);

/// Ancestors through fully directed (tail->arrow) edges, targets included.
NodeSet ancestors(const MixedGraph& g, const NodeSet& targets);
NodeSet descendants(const MixedGraph& g, const NodeSet& targets);

/// Nodes with a possibly directed path into some target (no edge mark on
/// the path points back toward the start), targets included.
NodeSet possible_ancestors(const MixedGraph& g, const NodeSet& targets);
NodeSet possible_descendants(const MixedGraph& g, const NodeSet& targets);

/// Neighbors of v regardless of marks.
NodeSet adjacents(const MixedGraph& g, int v);

/// Maps a DAG with latent nodes to the MAG over its observed nodes:
/// adjacency from inducing paths relative to the latents, endpoint marks
/// from ancestral relations. Node indices are re-numbered over observed
/// nodes in declaration order.
MixedGraph dag_to_mag(const Dag& g);

/// Visibility of a directed edge a->b in a MAG (certified absence of
/// latent confounding). Requires the edge a->b to exist.
bool is_visible(const MixedGraph& g, int a, int b);

}  // namespace aivgt
