#include <cmath>
#include <memory>
#include <random>

#include "amenwalk/error.hpp"
#include "amenwalk/wgraph.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace amenwalk;

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

// Simple random walk on an undirected graph.
WeightedDigraph srw(const Adjacency& adj) {
  std::vector<std::string> names;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> edges(adj.size());
  for (std::size_t v = 0; v < adj.size(); ++v) {
    names.push_back(std::to_string(v));
    for (std::size_t t : adj[v]) edges[v].emplace_back(t, Rational(1, adj[v].size()));
  }
  return WeightedDigraph(std::make_shared<ExplicitEdgeSource>(names, edges), 1000);
}

Adjacency path(std::size_t n) {
  Adjacency adj(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    adj[i].push_back(i + 1);
    adj[i + 1].push_back(i);
  }
  return adj;
}

VertexSet keys(WeightedDigraph& g, long from, long to) {
  std::vector<VertexId> ids;
  for (long k = from; k <= to; ++k) ids.push_back(g.intern(std::to_string(k)));
  return VertexSet(ids);
}

VertexSet all(WeightedDigraph& g) { return VertexSet(*g.all_vertices()); }

}  // namespace

TEST_CASE("epsilon boundary on the integer line") {
  auto ext = fixtures::z1();
  WeightedDigraph g = canonical_weight(ext);
  const VertexSet k = keys(g, 0, 9);
  const VertexSet b = epsilon_boundary(g, k, 0.1);
  CHECK(b.size() == 2);
  CHECK(b.contains(g.intern("0")));
  CHECK(b.contains(g.intern("9")));
  CHECK(epsilon_boundary(g, k, 0.6).empty());
  CHECK(isoperimetric_ratio(g, k, 0.1) == Rational(1, 5));
  CHECK(isoperimetric_ratio(g, keys(g, -3, 3), Rational(1, 4)) == Rational(2, 7));
  CHECK_THROWS_AS(isoperimetric_ratio(g, VertexSet{}, 0.1), InvalidInput);
}

TEST_CASE("epsilon boundary of a whole finite graph is empty") {
  WeightedDigraph g = srw(path(5));
  CHECK(epsilon_boundary(g, all(g), 0.0).empty());
  CHECK(isoperimetric_ratio(g, all(g), 0.0) == 0);
}

TEST_CASE("isoperimetric ratio of balls in the 4-regular tree") {
  auto ext = fixtures::f2();
  WeightedDigraph g = canonical_weight(ext);
  for (std::size_t r = 1; r <= 6; ++r) {
    const VertexSet ball = out_ball(g, r);
    const long sphere = 4 * static_cast<long>(std::pow(3, r - 1));
    const long volume = 2 * static_cast<long>(std::pow(3, r)) - 1;
    REQUIRE(ball.size() == static_cast<std::size_t>(volume));
    REQUIRE(isoperimetric_ratio(g, ball, 0.2) == Rational(sphere, volume));
  }
}

TEST_CASE("Folner search certifies an interval on Z") {
  auto ext = fixtures::z1();
  WeightedDigraph g = canonical_weight(ext);
  const FolnerResult f = folner_search(g, 0.4, 0.01, 100000);
  CHECK(f.certificate);
  CHECK(f.set.size() == 201);
  CHECK(f.ratio == Rational(2, 201));
  CHECK(isoperimetric_ratio(g, f.set, 0.4) == f.ratio);
}

TEST_CASE("Folner search finds nothing small on the tree") {
  auto ext = fixtures::f2();
  WeightedDigraph g = canonical_weight(ext);
  const FolnerResult f = folner_search(g, 0.2, 0.5, 100000);
  CHECK_FALSE(f.certificate);
  CHECK(f.ratio.get_d() >= 0.6);
  CHECK(isoperimetric_ratio(g, f.set, 0.2) == f.ratio);
}

TEST_CASE("Folner search on a single vertex with a self-loop") {
  WeightedDigraph g(std::make_shared<ExplicitEdgeSource>(std::vector<std::string>{"o"},
                                                         std::vector<std::vector<std::pair<std::size_t, Rational>>>{
                                                             {{0, Rational(1)}}}),
                    10);
  const FolnerResult f = folner_search(g, 0.1, 0.01, 10);
  CHECK(f.certificate);
  CHECK(f.set.size() == 1);
  CHECK(f.ratio == 0);
  CHECK_THROWS_AS(folner_search(g, 0.0, 0.1, 10), InvalidInput);
}

TEST_CASE("Gerl expansion constants of small graphs") {
  {
    WeightedDigraph g = srw({{1}, {0}});
    CHECK(gerl_expansion_constant(g).value == 1);
  }
  {
    WeightedDigraph g = srw({{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}});
    CHECK(gerl_expansion_constant(g).value == 1);
  }
  {
    WeightedDigraph g = srw(path(6));
    const ExpansionResult e = gerl_expansion_constant(g);
    // Five consecutive vertices leave through one endpoint.
    CHECK(e.value == Rational(1, 5));
    CHECK(e.minimizer.size() == 5);
    CHECK_FALSE(e.upper_bound);
  }
}

TEST_CASE("boundaries shrink as eps grows and stay inside K") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    std::vector<std::string> names;
    std::vector<std::vector<std::pair<std::size_t, Rational>>> edges(n);
    for (std::size_t v = 0; v < n; ++v) {
      names.push_back("v" + std::to_string(v));
      // Split 12 twelfths of mass among random targets.
      unsigned left = 12;
      while (left > 0) {
        const unsigned part = 1 + rng() % left;
        edges[v].emplace_back(rng() % n, Rational(part, 12));
        left -= part;
      }
    }
    WeightedDigraph g(std::make_shared<ExplicitEdgeSource>(names, edges), 100);
    const auto vertices = *g.all_vertices();
    std::vector<VertexId> pick;
    for (VertexId v : vertices) {
      if (rng() % 2) pick.push_back(v);
    }
    if (pick.empty()) pick.push_back(vertices.front());
    const VertexSet k(pick);
    VertexSet previous = k;
    for (double eps : {0.0, 1.0 / 24, 0.1, 0.25, 0.5, 0.9}) {
      const VertexSet b = epsilon_boundary(g, k, eps);
      for (VertexId v : b) {
        REQUIRE(k.contains(v));
        REQUIRE(previous.contains(v));
      }
      // Gerl's boundary after deleting the edges of weight <= eps.
      std::vector<VertexId> gerl;
      for (VertexId v : k) {
        for (const Edge& e : g.out_edges(v)) {
          if (e.weight_d > eps && !k.contains(e.target)) {
            gerl.push_back(v);
            break;
          }
        }
      }
      REQUIRE(VertexSet(gerl) == b);
      previous = b;
    }
  }
}

TEST_CASE("discovery order is reproducible") {
  auto a = fixtures::f2();
  auto b = fixtures::f2();
  WeightedDigraph ga = canonical_weight(a);
  WeightedDigraph gb = canonical_weight(b);
  const VertexSet ba = out_ball(ga, 4);
  const VertexSet bb = out_ball(gb, 4);
  REQUIRE(ba == bb);
  for (VertexId v : ba) REQUIRE(ga.key(v) == gb.key(v));
}

TEST_CASE("out-edge weights sum to one") {
  auto ext = fixtures::s3stab();
  WeightedDigraph g = canonical_weight(ext);
  const auto vertices = g.all_vertices();
  REQUIRE(vertices);
  for (VertexId v : *vertices) {
    Rational total = 0;
    for (const Edge& e : g.out_edges(v)) {
      REQUIRE(e.weight >= 0);
      REQUIRE(e.weight <= 1);
      total += e.weight;
    }
    REQUIRE(total == 1);
  }
}
