#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gnnsde/error.hpp"
#include "gnnsde/graph.hpp"
#include "gnnsde/synth.hpp"
#include "support/oracles.hpp"

using namespace gnnsde;

namespace {

std::string serialize(const Graph& g) {
  std::ostringstream out;
  write_edge_list(g, out);
  return out.str();
}

}  // namespace

TEST_CASE("build_graph: minimal and edgeless graphs") {
  const NodeRecord nodes[] = {{0, 0.0, 0.0}, {1, 1.0, 0.0}};
  const Edge edges[] = {{0, 1, 1.0}};
  const auto g = Graph::build(nodes, edges);
  CHECK(g.node_count() == 2);
  CHECK(g.out_degree(0) == 1);
  CHECK(g.in_degree(1) == 1);
  CHECK(g.out_degree(1) == 0);

  const auto empty = Graph::build(std::vector<Point>(3), {});
  for (NodeId v = 0; v < 3; ++v) {
    CHECK(empty.out_degree(v) == 0);
    CHECK(empty.in_degree(v) == 0);
  }
}

TEST_CASE("build_graph: 4-cycle") {
  const Edge edges[] = {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 3.0}, {3, 0, 4.0}};
  const auto g = Graph::build(std::vector<Point>(4), edges);
  CHECK(g.total_weight() == 10.0);
  for (NodeId v = 0; v < 4; ++v) {
    CHECK(g.out_degree(v) == 1);
    CHECK(g.in_degree(v) == 1);
  }
}

TEST_CASE("build_graph: rejects bad input, keeps parallel edges") {
  const std::vector<Point> two(2);
  CHECK_THROWS_AS(Graph::build(two, std::vector<Edge>{{0, 2, 1.0}}), ValidationError);
  CHECK_THROWS_AS(Graph::build(two, std::vector<Edge>{{0, 1, 0.0}}), ValidationError);
  CHECK_THROWS_AS(Graph::build(two, std::vector<Edge>{{0, 1, -1.0}}), ValidationError);
  CHECK_THROWS_AS(Graph::build(two, std::vector<Edge>{{1, 1, 1.0}}), ValidationError);
  const NodeRecord dup[] = {{0, 0, 0}, {0, 1, 1}};
  CHECK_THROWS_AS(Graph::build(dup, {}), ValidationError);

  const auto g = Graph::build(two, std::vector<Edge>{{0, 1, 2.0}, {0, 1, 1.0}});
  CHECK(g.edge_count() == 2);
  CHECK(g.out_degree(0) == 2);
  // Stable order keeps parallel edges as given.
  CHECK(g.edge(0).weight == 2.0);
  CHECK(g.edge(1).weight == 1.0);
}

TEST_CASE("in/out adjacency describe the same edge multiset") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testing::random_graph(15, 0.25, rng);
    std::vector<int> hits(g.edge_count(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      NodeId prev_from = 0;
      for (EdgeId e : g.in_edges(v)) {
        CHECK(g.edge(e).to == v);
        CHECK(g.edge(e).from >= prev_from);
        prev_from = g.edge(e).from;
        ++hits[e];
      }
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    std::size_t out_total = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      for (const auto& e : g.out_edges(u)) CHECK(e.from == u);
      out_total += g.out_degree(u);
    }
    CHECK(out_total == g.edge_count());
  }
}

TEST_CASE("normalize_coords") {
  SUBCASE("two endpoints") {
    const auto g = normalize_coords(Graph::build(std::vector<Point>{{0, 0}, {10, 20}}, {}));
    CHECK(g.coord(0) == Point{0, 0});
    CHECK(g.coord(1) == Point{1, 1});
  }
  SUBCASE("degenerate axes") {
    const auto g = normalize_coords(Graph::build(std::vector<Point>{{5, 5}, {5, 5}, {5, 5}}, {}));
    for (NodeId v = 0; v < 3; ++v) CHECK(g.coord(v) == Point{0, 0});
  }
  SUBCASE("three points") {
    const auto g = normalize_coords(Graph::build(std::vector<Point>{{0, 0}, {5, 20}, {10, 20}}, {}));
    CHECK(g.coord(1) == Point{0.5, 1});
    CHECK(g.coord(2) == Point{1, 1});
  }
  SUBCASE("idempotent") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const auto once = normalize_coords(testing::random_graph(12, 0.2, rng));
      CHECK(normalize_coords(once) == once);
    }
  }
}

TEST_CASE("edge-list text format") {
  SUBCASE("minimal file with comments") {
    std::istringstream in("# tiny\n2 1\n0 0 0\n1 3.5 -1\n\n# edges\n0 1 2.25\n");
    const auto g = read_edge_list(in);
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 1);
    CHECK(g.coord(1) == Point{3.5, -1});
    CHECK(g.edge(0).weight == 2.25);
  }
  SUBCASE("errors carry the line number") {
    std::istringstream neg("2 1\n0 0 0\n1 1 1\n0 1 -4\n");
    try {
      read_edge_list(neg);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    std::istringstream garbage("2 1\n0 0 0\n1 x 1\n0 1 1\n");
    CHECK_THROWS_AS(read_edge_list(garbage), ParseError);
    std::istringstream short_file("3 0\n0 0 0\n");
    CHECK_THROWS_AS(read_edge_list(short_file), ParseError);
    std::istringstream dangling("2 1\n0 0 0\n1 0 0\n0 7 1\n");
    CHECK_THROWS_AS(read_edge_list(dangling), ParseError);
  }
  SUBCASE("save/load/save of a 1k synthetic graph is byte-identical") {
    const auto g = generate(size_preset("1k", 42));
    const auto first = serialize(g);
    std::istringstream in(first);
    const auto loaded = read_edge_list(in);
    CHECK(serialize(loaded) == first);
    CHECK(loaded.node_count() == g.node_count());
    CHECK(loaded.edge_count() == g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      CHECK(loaded.edge(e).from == g.edge(e).from);
      CHECK(loaded.edge(e).to == g.edge(e).to);
      // 9 significant digits.
      CHECK(loaded.edge(e).weight == doctest::Approx(g.edge(e).weight).epsilon(5e-9));
    }
  }
  SUBCASE("integral coordinates and weights round-trip exactly") {
    SynthConfig config;
    config.rows = config.cols = 5;
    const auto g = generate(config);
    std::istringstream in(serialize(g));
    CHECK(read_edge_list(in) == g);
  }
}

TEST_CASE("construction is deterministic") {
  std::mt19937_64 a(9), b(9);
  CHECK(serialize(testing::random_graph(30, 0.1, a)) == serialize(testing::random_graph(30, 0.1, b)));
}

TEST_CASE("reversed graph flips every edge") {
  std::mt19937_64 rng(5);
  const auto g = testing::random_graph(10, 0.3, rng);
  const auto r = g.reversed();
  CHECK(r.edge_count() == g.edge_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    CHECK(r.out_degree(v) == g.in_degree(v));
    CHECK(r.in_degree(v) == g.out_degree(v));
  }
  CHECK(r.reversed() == g);
}
