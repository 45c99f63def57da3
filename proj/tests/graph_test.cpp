#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "crowdcast/generators.hpp"
#include "crowdcast/graph.hpp"
#include "crowdcast/rng.hpp"
#include "support/oracles.hpp"

using namespace crowdcast;

TEST_CASE("edge list parsing") {
  SUBCASE("two-line list") {
    std::istringstream in("0 1\n1 2\n");
    const auto g = load_edge_list(in);
    CHECK(g.node_count == 3);
    CHECK(g.edge_count == 2);
    REQUIRE(g.out_neighbors(0).size() == 1);
    CHECK(g.out_neighbors(0)[0] == 1);
    CHECK(g.out_edges(0)[0] == 0);
  }

  SUBCASE("empty stream with hint") {
    std::istringstream in("");
    const auto g = load_edge_list(in, 5);
    CHECK(g.node_count == 5);
    CHECK(g.edge_count == 0);
  }

  SUBCASE("parallel edges keep distinct ids") {
    std::istringstream in("0 1\n0 1\n");
    const auto g = load_edge_list(in);
    CHECK(g.edge_count == 2);
    REQUIRE(g.out_edges(0).size() == 2);
    CHECK(g.out_edges(0)[0] != g.out_edges(0)[1]);
  }

  SUBCASE("comments, blanks and weight columns") {
    std::istringstream in("# header\n\n0 1 0.25\n  \n2 0\n");
    const auto g = load_edge_list(in);
    CHECK(g.node_count == 3);
    CHECK(g.edge_count == 2);
  }

  SUBCASE("self loops are retained") {
    std::istringstream in("1 1\n");
    const auto g = load_edge_list(in);
    CHECK(g.edge_count == 1);
    CHECK(g.out_neighbors(1)[0] == 1);
  }

  SUBCASE("malformed line names the line number") {
    std::istringstream in("0 1\nnope\n");
    CHECK_THROWS_WITH_AS(load_edge_list(in),
                         doctest::Contains("line 2"), std::runtime_error);
  }

  SUBCASE("negative id is rejected") {
    std::istringstream in("0 -1\n");
    CHECK_THROWS_AS(load_edge_list(in), std::runtime_error);
  }

  SUBCASE("trailing garbage is rejected") {
    std::istringstream in("0 1 0.5 x\n");
    CHECK_THROWS_AS(load_edge_list(in), std::runtime_error);
  }

  SUBCASE("hint smaller than the max id is ignored") {
    std::istringstream in("0 7\n");
    CHECK(load_edge_list(in, 3).node_count == 8);
  }
}

TEST_CASE("adjacency transpose consistency on random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = uniform_random_graph(1 + std::int32_t(seed) * 3, 40, seed);
    std::multiset<std::pair<NodeId, EdgeId>> out_pairs, in_pairs;
    std::size_t out_total = 0, in_total = 0;
    for (NodeId u = 0; u < g.node_count; ++u) {
      const auto nbrs = g.out_neighbors(u);
      const auto edges = g.out_edges(u);
      out_total += nbrs.size();
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        CHECK(g.src[std::size_t(edges[k])] == u);
        CHECK(g.dst[std::size_t(edges[k])] == nbrs[k]);
        out_pairs.emplace(nbrs[k], edges[k]);
      }
    }
    for (NodeId v = 0; v < g.node_count; ++v) {
      const auto nbrs = g.in_neighbors(v);
      const auto edges = g.in_edges(v);
      in_total += nbrs.size();
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        CHECK(g.dst[std::size_t(edges[k])] == v);
        CHECK(g.src[std::size_t(edges[k])] == nbrs[k]);
        in_pairs.emplace(v, edges[k]);
      }
    }
    CHECK(out_total == std::size_t(g.edge_count));
    CHECK(in_total == std::size_t(g.edge_count));
    // Every edge id appears exactly once per direction.
    std::vector<int> seen(std::size_t(g.edge_count), 0);
    for (const auto& [v, e] : in_pairs) seen[std::size_t(e)]++;
    for (int c : seen) CHECK(c == 1);
  }
}

TEST_CASE("uniform layers") {
  std::istringstream in("0 1\n1 2\n");
  const auto g = load_edge_list(in);

  SUBCASE("constant rows") {
    const double probs[] = {0.3, 0.5};
    const auto w = assign_uniform_layers(g, probs);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == std::vector<double>{0.3, 0.3});
    CHECK(w[1] == std::vector<double>{0.5, 0.5});
  }

  SUBCASE("zero and one are valid") {
    const double zero[] = {0.0};
    CHECK(assign_uniform_layers(g, zero)[0][0] == 0.0);
    const double one[] = {1.0};
    CHECK(assign_uniform_layers(g, one)[0][1] == 1.0);
  }

  SUBCASE("out-of-range probability") {
    const double bad[] = {1.5};
    CHECK_THROWS_AS(assign_uniform_layers(g, bad), std::invalid_argument);
  }
}

TEST_CASE("location map") {
  const LocationMap grid(1000.0, 100.0);
  CHECK(grid.subarea_count() == 100);
  CHECK(grid.subarea_of(0.0, 0.0) == 0);
  CHECK(grid.subarea_of(1000.0, 1000.0) == 99);  // boundary clamp
  CHECK(grid.subarea_of(250.0, 310.0) == 32);

  CHECK_THROWS_AS(LocationMap(1000.0, 300.0), std::invalid_argument);
  CHECK_THROWS_AS(grid.subarea_of(-1.0, 0.0), std::out_of_range);
  CHECK_THROWS_AS(grid.subarea_of(0.0, 1000.5), std::out_of_range);
}

TEST_CASE("scenario synthesis") {
  const auto skeleton = uniform_random_graph(60, 150, 7);
  ScenarioParams params;
  params.area_side = 1000.0;
  params.block_side = 100.0;
  params.task_probabilities = {0.3, 0.5};

  const TaskGraph a = synthesize_scenario(skeleton, params, 42);
  const TaskGraph b = synthesize_scenario(skeleton, params, 42);
  const TaskGraph c = synthesize_scenario(skeleton, params, 43);

  SUBCASE("pure function of the seed") {
    bool identical = true;
    for (NodeId v = 0; v < a.node_count(); ++v)
      identical &= a.location_x(v) == b.location_x(v) &&
                   a.location_y(v) == b.location_y(v);
    for (TaskId j = 0; j < a.task_count(); ++j)
      for (std::int32_t s = 0; s < a.grid().subarea_count(); ++s)
        identical &= a.quality(j, s) == b.quality(j, s);
    CHECK(identical);
    bool differs = false;
    for (NodeId v = 0; v < a.node_count(); ++v)
      differs |= a.location_x(v) != c.location_x(v);
    CHECK(differs);
  }

  SUBCASE("grid and ranges") {
    CHECK(a.grid().subarea_count() == 100);
    for (TaskId j = 0; j < a.task_count(); ++j)
      for (std::int32_t s = 0; s < a.grid().subarea_count(); ++s) {
        CHECK(a.quality(j, s) >= 0.0);
        CHECK(a.quality(j, s) <= 1.0);
      }
  }

  SUBCASE("grid partition covers every node once") {
    std::vector<int> counts(std::size_t(a.grid().subarea_count()), 0);
    for (NodeId v = 0; v < a.node_count(); ++v)
      counts[std::size_t(a.location_of(v))]++;
    int total = 0;
    for (int cnt : counts) total += cnt;
    CHECK(total == a.node_count());
  }

  SUBCASE("quality mass additivity") {
    for (TaskId j = 0; j < a.task_count(); ++j) {
      std::vector<int> counts(std::size_t(a.grid().subarea_count()), 0);
      for (NodeId v = 0; v < a.node_count(); ++v)
        counts[std::size_t(a.location_of(v))]++;
      double mass = 0.0;
      for (std::int32_t s = 0; s < a.grid().subarea_count(); ++s)
        mass += a.quality(j, s) * counts[std::size_t(s)];
      CHECK(a.task_quality_mass(j) == doctest::Approx(mass).epsilon(1e-12));
    }
  }

  SUBCASE("weight matrix validation") {
    auto weights = assign_uniform_layers(skeleton, params.task_probabilities);
    weights[0][3] = 1.5;
    std::vector<double> xs(std::size_t(skeleton.node_count), 1.0);
    std::vector<std::vector<double>> quality(
        2, std::vector<double>(std::size_t(a.grid().subarea_count()), 0.5));
    CHECK_THROWS_AS(
        TaskGraph(skeleton, weights, xs, xs, a.grid(), quality),
        std::invalid_argument);
  }
}
