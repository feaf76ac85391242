#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "aivgt/errors.hpp"
#include "aivgt/graph.hpp"
#include "test_support.hpp"

using namespace aivgt;
using namespace testsupport;

TEST_CASE("dag construction rejects cycles and duplicates") {
  Dag g;
  g.add_node("A");
  g.add_node("B");
  g.add_node("C");
  g.add_edge("A", "B");
  g.add_edge("B", "C");
  CHECK_THROWS_AS(g.add_edge("C", "A"), input_error);
  CHECK_THROWS_AS(g.add_edge("A", "B"), input_error);
  CHECK_THROWS_AS(g.add_edge("B", "A"), input_error);  // one edge per pair
  CHECK_THROWS_AS(g.add_edge("A", "A"), input_error);
  Dag h;
  h.add_node("A");
  CHECK_THROWS_AS(h.add_node("A"), input_error);
}

TEST_CASE("d-separation basics") {
  Dag chain;
  chain.add_node("A");
  chain.add_node("B");
  chain.add_node("C");
  chain.add_edge("A", "B");
  chain.add_edge("B", "C");
  CHECK(d_separated(chain, 0, 2, {1}));
  CHECK_FALSE(d_separated(chain, 0, 2, {}));

  Dag coll;
  coll.add_node("A");
  coll.add_node("B");
  coll.add_node("C");
  coll.add_edge("A", "B");
  coll.add_edge("C", "B");
  CHECK_FALSE(d_separated(coll, 0, 2, {1}));
  CHECK(d_separated(coll, 0, 2, {}));

  CHECK_THROWS_AS(d_separated(chain, 0, 0, {}), input_error);
  CHECK_THROWS_AS(d_separated(chain, 0, 2, {0}), input_error);
  CHECK_THROWS_AS(d_separated(chain, 0, 9, {}), input_error);
}

TEST_CASE("d-separation on the scenario-d DAG") {
  Dag g = true_dag(Scenario::D);
  const int s1 = g.require("S1"), y = g.require("Y"), w = g.require("W");
  // conditioning on the collider W opens S1 -> W <- U1 -> Y
  CHECK_FALSE(d_separated(g, s1, y, {w}));
  CHECK(brute_d_separated(g, s1, y, {w}) == d_separated(g, s1, y, {w}));
}

TEST_CASE("ancestors and descendants") {
  Dag g;
  g.add_node("A");
  g.add_node("B");
  g.add_node("C");
  g.add_edge("A", "B");
  g.add_edge("B", "C");
  CHECK(ancestors(g, {2}) == NodeSet{0, 1, 2});
  CHECK(ancestors(g, {0}) == NodeSet{0});
  CHECK(descendants(g, {0}) == NodeSet{0, 1, 2});
  CHECK(ancestors(g, {}).empty());

  Dag d = true_dag(Scenario::D);
  NodeSet an_y = ancestors(d, {d.require("Y")});
  NodeSet observed_an;
  for (int v : an_y)
    if (d.observed(v)) observed_an.push_back(v);
  NodeSet expected;
  for (const char* n : {"S1", "S2", "W", "X2", "X3", "Y"}) set_insert(expected, d.require(n));
  CHECK(observed_an == expected);
}

TEST_CASE("possible ancestors on small PAGs") {
  MixedGraph g(GraphKind::Pag);
  g.add_node("A");
  g.add_node("B");
  g.set_edge(0, 1, Mark::Circle, Mark::Arrow);  // A o-> B
  CHECK(possible_ancestors(g, {1}) == NodeSet{0, 1});

  MixedGraph h(GraphKind::Pag);
  h.add_node("A");
  h.add_node("B");
  h.set_edge(0, 1, Mark::Arrow, Mark::Arrow);  // A <-> B
  CHECK(possible_ancestors(h, {1}) == NodeSet{1});
}

TEST_CASE("adjacents") {
  MixedGraph g(GraphKind::Pag);
  g.add_node("A");
  g.add_node("B");
  g.add_node("C");
  g.set_edge(0, 1, Mark::Tail, Mark::Arrow);
  CHECK(adjacents(g, 1) == NodeSet{0});
  CHECK(adjacents(g, 2).empty());
}

TEST_CASE("dag_to_mag maps a latent confounder to a bidirected edge") {
  Dag g;
  g.add_node("X");
  g.add_node("Y");
  g.add_node("U", false);
  g.add_edge("U", "X");
  g.add_edge("U", "Y");
  MixedGraph mag = dag_to_mag(g);
  REQUIRE(mag.adjacent(mag.require("X"), mag.require("Y")));
  CHECK(mag.mark_at(mag.require("X"), mag.require("Y")) == Mark::Arrow);
  CHECK(mag.mark_at(mag.require("Y"), mag.require("X")) == Mark::Arrow);
}

TEST_CASE("dag_to_mag of scenario (a)") {
  MixedGraph mag = dag_to_mag(true_dag(Scenario::A));
  auto id = [&](const char* n) { return mag.require(n); };
  // S1 -> W, S2 -> W, W -> Y plus the induced S1 -> Y, S2 -> Y
  CHECK(mag.edge_count() == 5);
  for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{
           {"S1", "W"}, {"S2", "W"}, {"W", "Y"}, {"S1", "Y"}, {"S2", "Y"}}) {
    REQUIRE(mag.adjacent(id(a), id(b)));
    CHECK(mag.mark_at(id(a), id(b)) == Mark::Tail);
    CHECK(mag.mark_at(id(b), id(a)) == Mark::Arrow);
  }
  NodeSet adj_y = adjacents(mag, id("Y"));
  for (const char* n : {"W", "S1", "S2"}) CHECK(set_contains(adj_y, id(n)));
  mag.validate_mag();
}

TEST_CASE("dag_to_mag keeps a fully observed DAG unchanged") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Dag g = random_dag(rng, 6, 0, 0.35);
    MixedGraph mag = dag_to_mag(g);
    CHECK(mag.edge_count() == g.edge_count());
    for (int v = 0; v < g.node_count(); ++v)
      for (int c : g.children(v)) {
        REQUIRE(mag.adjacent(v, c));
        CHECK(mag.mark_at(v, c) == Mark::Tail);
        CHECK(mag.mark_at(c, v) == Mark::Arrow);
      }
  }
}

TEST_CASE("m-separation basics and errors") {
  MixedGraph g(GraphKind::Mag);
  g.add_node("A");
  g.add_node("B");
  g.set_edge(0, 1, Mark::Arrow, Mark::Arrow);
  CHECK_FALSE(m_separated(g, 0, 1, {}));

  MixedGraph h(GraphKind::Mag);
  h.add_node("A");
  h.add_node("B");
  h.add_node("C");
  h.set_edge(0, 2, Mark::Tail, Mark::Arrow);
  h.set_edge(1, 2, Mark::Tail, Mark::Arrow);
  CHECK(m_separated(h, 0, 1, {}));
  CHECK_FALSE(m_separated(h, 0, 1, {2}));

  MixedGraph pag(GraphKind::Pag);
  pag.add_node("A");
  pag.add_node("B");
  pag.set_edge(0, 1, Mark::Circle, Mark::Circle);
  CHECK_THROWS_AS(m_separated(pag, 0, 1, {}), input_error);
}

TEST_CASE("mapped MAG of scenario (a): S1 and Y are never separable") {
  Dag g = true_dag(Scenario::A);
  MixedGraph mag = dag_to_mag(g);
  const int s1 = mag.require("S1"), y = mag.require("Y");
  NodeSet others;
  for (int v = 0; v < mag.node_count(); ++v)
    if (v != s1 && v != y) others.push_back(v);
  for (const NodeSet& z : all_subsets(others)) CHECK_FALSE(m_separated(mag, s1, y, z));
}

TEST_CASE("separation matches brute force on random graphs") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 40; ++rep) {
    Dag g = random_dag(rng, 6, 2, 0.3);
    NodeSet obs = g.observed_nodes();
    for (size_t i = 0; i < obs.size(); ++i)
      for (size_t j = i + 1; j < obs.size(); ++j) {
        NodeSet pool;
        for (int v : obs)
          if (v != obs[i] && v != obs[j]) pool.push_back(v);
        for (const NodeSet& z : all_subsets(pool)) {
          CHECK(d_separated(g, obs[i], obs[j], z) == brute_d_separated(g, obs[i], obs[j], z));
        }
      }
  }
}

TEST_CASE("mapping soundness: MAG separation equals DAG separation") {
  std::mt19937_64 rng(1234);
  for (int rep = 0; rep < 30; ++rep) {
    Dag g = random_dag(rng, 6, 3, 0.3);
    MixedGraph mag = dag_to_mag(g);
    NodeSet obs = g.observed_nodes();
    for (size_t i = 0; i < obs.size(); ++i)
      for (size_t j = i + 1; j < obs.size(); ++j) {
        int a = obs[i], b = obs[j];
        int ma = mag.require(g.name(a)), mb = mag.require(g.name(b));
        NodeSet pool;
        for (int v : obs)
          if (v != a && v != b) pool.push_back(v);
        for (const NodeSet& z : all_subsets(pool)) {
          NodeSet mz;
          for (int v : z) set_insert(mz, mag.require(g.name(v)));
          CHECK(d_separated(g, a, b, z) == m_separated(mag, ma, mb, mz));
        }
      }
  }
}

TEST_CASE("ancestry is preserved by dag_to_mag") {
  std::mt19937_64 rng(555);
  for (int rep = 0; rep < 30; ++rep) {
    Dag g = random_dag(rng, 7, 2, 0.3);
    MixedGraph mag = dag_to_mag(g);
    NodeSet obs = g.observed_nodes();
    for (int a : obs)
      for (int b : obs) {
        if (a == b) continue;
        bool dag_anc = set_contains(ancestors(g, {b}), a);
        bool mag_anc = set_contains(
            ancestors(mag, {mag.require(g.name(b))}), mag.require(g.name(a)));
        CHECK(dag_anc == mag_anc);
      }
  }
}

TEST_CASE("possible_ancestors equals ancestors on circle-free graphs") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 25; ++rep) {
    Dag g = random_dag(rng, 6, 2, 0.3);
    MixedGraph mag = dag_to_mag(g);
    for (int v = 0; v < mag.node_count(); ++v)
      CHECK(possible_ancestors(mag, {v}) == ancestors(mag, {v}));
  }
}

TEST_CASE("is_visible") {
  // S -> W -> Y with S not adjacent to Y certifies W -> Y
  MixedGraph g(GraphKind::Mag);
  g.add_node("S");
  g.add_node("W");
  g.add_node("Y");
  g.set_edge(0, 1, Mark::Tail, Mark::Arrow);
  g.set_edge(1, 2, Mark::Tail, Mark::Arrow);
  CHECK(is_visible(g, 1, 2));
  CHECK_THROWS_AS(is_visible(g, 2, 1), input_error);
  CHECK_THROWS_AS(is_visible(g, 0, 2), input_error);

  // two-node MAG: no witness exists
  MixedGraph h(GraphKind::Mag);
  h.add_node("A");
  h.add_node("B");
  h.set_edge(0, 1, Mark::Tail, Mark::Arrow);
  CHECK_FALSE(is_visible(h, 0, 1));

  // the treatment-outcome edge of the mapped scenario (a) MAG is invisible
  MixedGraph mag = dag_to_mag(true_dag(Scenario::A));
  CHECK_FALSE(is_visible(mag, mag.require("W"), mag.require("Y")));
}

TEST_CASE("is_visible via a collider path of parents") {
  // K <-> C with C -> B and C -> A ... pattern: K *-> C, C in Pa(B), path into A
  MixedGraph g(GraphKind::Mag);
  int k = g.add_node("K");
  int c = g.add_node("C");
  int a = g.add_node("A");
  int b = g.add_node("B");
  g.set_edge(k, c, Mark::Arrow, Mark::Arrow);
  g.set_edge(c, a, Mark::Arrow, Mark::Arrow);
  g.set_edge(c, b, Mark::Tail, Mark::Arrow);
  g.set_edge(a, b, Mark::Tail, Mark::Arrow);
  CHECK(is_visible(g, a, b));
}

TEST_CASE("conditional and ancestral instrument checks") {
  Dag fig1a = fig1a_dag();
  CHECK(is_civ_in_dag(fig1a, fig1a.require("S"), fig1a.require("W"), fig1a.require("Y"), {}));

  Dag d = true_dag(Scenario::D);
  auto id = [&](const char* n) { return d.require(n); };
  CHECK(is_civ_in_dag(d, id("S2"), id("W"), id("Y"), {id("X3")}));
  CHECK(is_aiv_in_dag(d, id("S1"), id("W"), id("Y"), make_set({id("X2"), id("X3")})));
  // X1 is neither an ancestor of Y nor of S1
  CHECK_FALSE(is_aiv_in_dag(d, id("S1"), id("W"), id("Y"), {id("X1")}));

  Dag c = true_dag(Scenario::C);
  auto cid = [&](const char* n) { return c.require(n); };
  // conditioning on the collider X1 opens S1 -> X1 <- U2 -> Y
  CHECK_FALSE(is_civ_in_dag(c, cid("S1"), cid("W"), cid("Y"), {cid("X1")}));
  CHECK(is_civ_in_dag(c, cid("S1"), cid("W"), cid("Y"), {}));

  Dag a = true_dag(Scenario::A);
  CHECK(is_aiv_in_dag(a, a.require("S1"), a.require("W"), a.require("Y"), {}));

  // missing w->y edge is an input error
  Dag broken;
  broken.add_node("S");
  broken.add_node("W");
  broken.add_node("Y");
  broken.add_edge("S", "W");
  CHECK_THROWS_AS(is_civ_in_dag(broken, 0, 1, 2, {}), input_error);
}

TEST_CASE("direct AIVs end up adjacent to Y in the mapped MAG") {
  std::mt19937_64 rng(2024);
  int eligible = 0;
  for (int rep = 0; rep < 60; ++rep) {
    Dag g = random_iv_dag(rng, 5, 2, 0.3);
    MixedGraph mag = dag_to_mag(g);
    const int w = g.require("W"), y = g.require("Y");
    const int mw = mag.require("W"), my = mag.require("Y");
    NodeSet pa_y_mag;
    for (int u : mag.neighbors(my))
      if (mag.mark_at(u, my) == Mark::Tail && mag.mark_at(my, u) == Mark::Arrow)
        set_insert(pa_y_mag, u);

    for (int s = 0; s < g.node_count(); ++s) {
      if (!g.observed(s) || s == w || s == y) continue;
      auto ms = mag.find(g.name(s));
      if (!ms) continue;

      // direct per the operational reading: an edge into W in the MAG, or a
      // collider path into W whose interior lies in Pa(Y)
      bool direct = false;
      if (mag.adjacent(*ms, mw) && mag.mark_at(mw, *ms) == Mark::Arrow) direct = true;
      if (!direct) {
        std::vector<bool> seen(mag.node_count(), false);
        std::vector<int> stack;
        for (int c : mag.neighbors(*ms))
          if (set_contains(pa_y_mag, c) && mag.mark_at(c, *ms) == Mark::Arrow) {
            stack.push_back(c);
            seen[c] = true;
          }
        while (!stack.empty() && !direct) {
          int c = stack.back();
          stack.pop_back();
          for (int u : mag.neighbors(c)) {
            if (mag.mark_at(c, u) != Mark::Arrow) continue;
            if (u == mw && mag.mark_at(mw, c) == Mark::Arrow) {
              direct = true;
              break;
            }
            if (!seen[u] && set_contains(pa_y_mag, u) && mag.mark_at(u, c) == Mark::Arrow) {
              seen[u] = true;
              stack.push_back(u);
            }
          }
        }
      }
      if (!direct) continue;

      // AIV for some conditioning set?
      NodeSet pool;
      for (int v : g.observed_nodes())
        if (v != s && v != w && v != y) pool.push_back(v);
      bool aiv = false;
      for (const NodeSet& z : all_subsets(pool))
        if (is_aiv_in_dag(g, s, w, y, z)) {
          aiv = true;
          break;
        }
      if (!aiv) continue;

      ++eligible;
      CHECK(set_contains(adjacents(mag, my), *ms));
    }
  }
  CHECK(eligible > 10);  // the generator must actually produce direct AIVs
}
