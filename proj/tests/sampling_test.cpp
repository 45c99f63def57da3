#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "crowdcast/diffusion.hpp"
#include "crowdcast/sampling.hpp"
#include "support/oracles.hpp"

using namespace crowdcast;
using namespace crowdcast::testing;

namespace {

TaskGraph single_edge_graph(double w) {
  GraphSkeleton skeleton = GraphSkeleton::from_edges(2, {0}, {1});
  std::vector<std::vector<double>> weights = {{w}};
  std::vector<double> xs = {1.0, 2.0}, ys = {1.0, 1.0};
  LocationMap grid(10.0, 10.0);
  std::vector<std::vector<double>> quality = {{1.0}};
  return TaskGraph(std::move(skeleton), weights, xs, ys, grid, quality);
}

}  // namespace

TEST_CASE("single reverse set shapes") {
  SUBCASE("isolated node yields just the root") {
    GraphSkeleton skeleton = GraphSkeleton::from_edges(1, {}, {});
    std::vector<std::vector<double>> weights = {{}};
    LocationMap grid(10.0, 10.0);
    TaskGraph graph(std::move(skeleton), weights, {1.0}, {1.0}, grid, {{0.7}});
    Rng rng(3);
    const RrSet set = sample_rr_set(graph, rng);
    CHECK(set.task == 0);
    CHECK(set.root == 0);
    CHECK(set.nodes == std::vector<NodeId>{0});
  }

  SUBCASE("unit weights collect the full reverse-reachable set") {
    auto inst = random_instance(
        {.nodes = 9, .edges = 20, .tasks = 1, .users = 3, .weight_choices = {1.0}},
        17);
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
      const RrSet set = sample_rr_set(inst.graph, rng);
      // Brute-force reverse reachability from the root over all edges.
      std::vector<char> reach(std::size_t(inst.graph.node_count()), 0);
      std::vector<NodeId> stack = {set.root};
      reach[std::size_t(set.root)] = 1;
      const auto& skel = inst.graph.skeleton();
      while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (NodeId u : skel.in_neighbors(v))
          if (!reach[std::size_t(u)]) {
            reach[std::size_t(u)] = 1;
            stack.push_back(u);
          }
      }
      auto nodes = set.nodes;
      std::sort(nodes.begin(), nodes.end());
      std::vector<NodeId> expected;
      for (NodeId v = 0; v < inst.graph.node_count(); ++v)
        if (reach[std::size_t(v)]) expected.push_back(v);
      CHECK(nodes == expected);
    }
  }

  SUBCASE("single edge: root and membership probabilities") {
    const TaskGraph graph = single_edge_graph(0.5);
    Rng rng(11);
    const int draws = 200000;
    int root_b = 0, root_b_with_a = 0;
    for (int i = 0; i < draws; ++i) {
      const RrSet set = sample_rr_set(graph, rng);
      if (set.root == 1) {
        ++root_b;
        if (set.nodes.size() == 2) ++root_b_with_a;
      }
    }
    // Pr[root=b] = 1/2; Pr[a in set | root=b] = w = 1/2.
    CHECK(double(root_b) / draws == doctest::Approx(0.5).epsilon(0.02));
    CHECK(double(root_b_with_a) / draws == doctest::Approx(0.25).epsilon(0.03));
  }

  SUBCASE("zero-mass everywhere is a domain error") {
    GraphSkeleton skeleton = GraphSkeleton::from_edges(2, {0}, {1});
    std::vector<std::vector<double>> weights = {{0.5}};
    LocationMap grid(10.0, 10.0);
    TaskGraph graph(std::move(skeleton), weights, {1.0, 2.0}, {1.0, 1.0}, grid,
                    {{0.0}});
    Rng rng(1);
    CHECK_THROWS_AS(sample_rr_set(graph, rng), std::domain_error);
  }

  SUBCASE("zero-mass task is resampled away") {
    GraphSkeleton skeleton = GraphSkeleton::from_edges(2, {0}, {1});
    std::vector<std::vector<double>> weights = {{0.5}, {0.5}};
    LocationMap grid(10.0, 10.0);
    TaskGraph graph(std::move(skeleton), weights, {1.0, 2.0}, {1.0, 1.0}, grid,
                    {{0.8}, {0.0}});
    Rng rng(1);
    for (int i = 0; i < 50; ++i) CHECK(sample_rr_set(graph, rng).task == 0);
  }
}

TEST_CASE("root distribution matches the quality weighting") {
  auto inst = random_instance({.nodes = 6,
                               .edges = 9,
                               .tasks = 2,
                               .users = 4,
                               .quality_lo = 0.2,
                               .quality_hi = 1.0},
                              23);
  RrCollection rr(inst.graph, 5150);
  rr.extend(100000);

  std::map<std::pair<TaskId, NodeId>, std::int64_t> counts;
  std::map<TaskId, std::int64_t> per_task;
  for (std::size_t x = 0; x < rr.size(); ++x) {
    counts[{rr.set(x).task, rr.set(x).root}]++;
    per_task[rr.set(x).task]++;
  }
  for (TaskId j = 0; j < inst.graph.task_count(); ++j) {
    const double mass = inst.graph.task_quality_mass(j);
    double statistic = 0.0;
    for (NodeId v = 0; v < inst.graph.node_count(); ++v) {
      const double expected =
          double(per_task[j]) * inst.graph.node_quality(j, v) / mass;
      const auto it = counts.find({j, v});
      const double observed = it == counts.end() ? 0.0 : double(it->second);
      statistic += (observed - expected) * (observed - expected) / expected;
    }
    const double p =
        chi_squared_pvalue(statistic, inst.graph.node_count() - 1);
    CHECK(p > 0.01);
  }
}

TEST_CASE("estimator") {
  SUBCASE("empty selection covers nothing") {
    auto inst = random_instance({.nodes = 6, .edges = 8, .tasks = 2, .users = 4},
                                31);
    RrCollection rr(inst.graph, 7);
    rr.extend(500);
    CHECK(rr.estimate({}, inst.bidders) == 0.0);
  }

  SUBCASE("single covered set contributes its task mass") {
    const TaskGraph graph = single_edge_graph(1.0);  // mass = 2
    BidderProfile bidders{{0}, {1u}, {1.0}};
    RrCollection rr(graph, 99);
    rr.extend(1);
    const std::int32_t sel[] = {0};
    // Node 0 reaches every root on a deterministic layer, so the one set is
    // always covered and the estimate is the full mass.
    CHECK(rr.estimate(sel, bidders) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("unbiased against the enumeration oracle") {
    auto inst = random_instance({.nodes = 7,
                                 .edges = 10,
                                 .tasks = 2,
                                 .users = 5,
                                 .weight_choices = {0.0, 0.5, 1.0},
                                 .quality_lo = 0.3},
                                47);
    const std::vector<std::int32_t> set = {0, 2, 3};
    const double exact = exact_value(inst.graph, set, inst.bidders);
    RrCollection rr(inst.graph, 1234);
    rr.extend(60000);
    CHECK(rr.estimate(set, inst.bidders) == doctest::Approx(exact).epsilon(0.02));
  }

  SUBCASE("estimate over an empty collection is a domain error") {
    auto inst = random_instance({.nodes = 5, .edges = 5, .tasks = 1, .users = 3},
                                53);
    RrCollection rr(inst.graph, 1);
    CHECK_THROWS_AS(rr.estimate({}, inst.bidders), std::domain_error);
  }
}

TEST_CASE("incremental coverage state") {
  auto inst = random_instance({.nodes = 10,
                               .edges = 25,
                               .tasks = 2,
                               .users = 7,
                               .weight_lo = 0.2,
                               .weight_hi = 0.7},
                              61);
  RrCollection rr(inst.graph, 4242);
  rr.extend(2000);

  SUBCASE("marginal gain equals the from-scratch difference") {
    Rng rng(9);
    for (int t = 0; t < 1000; ++t) {
      CoverageState state(rr, inst.bidders);
      std::vector<std::int32_t> set;
      for (std::int32_t b = 0; b < std::int32_t(inst.bidders.size()); ++b)
        if (rng.bernoulli(0.4)) {
          set.push_back(b);
          state.add(std::size_t(b));
        }
      std::int32_t v;
      do {
        v = std::int32_t(rng.below(inst.bidders.size()));
      } while (std::find(set.begin(), set.end(), v) != set.end());

      auto with_v = set;
      with_v.push_back(v);
      const double scratch =
          rr.estimate(with_v, inst.bidders) - rr.estimate(set, inst.bidders);
      CHECK(state.gain(std::size_t(v)) == doctest::Approx(scratch).epsilon(1e-9));
      CHECK(state.covered_value() ==
            doctest::Approx(rr.estimate(set, inst.bidders)).epsilon(1e-9));
    }
  }

  SUBCASE("gain of a selected bidder collapses to zero") {
    CoverageState state(rr, inst.bidders);
    state.add(0);
    CHECK(state.gain(0) == 0.0);
  }

  SUBCASE("stale state is rejected") {
    CoverageState state(rr, inst.bidders);
    rr.extend(2100);
    CHECK_THROWS_AS(state.add(0), std::logic_error);
  }
}

TEST_CASE("collection growth determinism") {
  auto inst = random_instance({.nodes = 12, .edges = 30, .tasks = 2, .users = 6},
                              71);

  SUBCASE("extend to the current size is a no-op") {
    RrCollection rr(inst.graph, 8);
    rr.extend(100);
    RrCollection copy = rr;
    rr.extend(100);
    CHECK(rr.same_sets(copy));
  }

  SUBCASE("same seed, same collection") {
    RrCollection a(inst.graph, 9);
    a.extend(256);
    RrCollection b(inst.graph, 9);
    b.extend(256);
    CHECK(a.same_sets(b));
    RrCollection c(inst.graph, 10);
    c.extend(256);
    CHECK(!a.same_sets(c));
  }

  SUBCASE("one growth equals two growths equals threaded growth") {
    RrCollection once(inst.graph, 11);
    once.extend(512);
    RrCollection twice(inst.graph, 11);
    twice.extend(256);
    twice.extend(512);
    CHECK(once.same_sets(twice));
    RrCollection threaded(inst.graph, 11);
    threaded.extend(512, 4);
    CHECK(once.same_sets(threaded));
  }

  SUBCASE("shrinking is rejected") {
    RrCollection rr(inst.graph, 12);
    rr.extend(64);
    CHECK_THROWS_AS(rr.extend(32), std::invalid_argument);
  }
}

TEST_CASE("estimator is monotone and submodular on a fixed collection") {
  auto inst = random_instance({.nodes = 9, .edges = 18, .tasks = 2, .users = 6},
                              83);
  RrCollection rr(inst.graph, 13);
  rr.extend(1500);
  Rng rng(14);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::int32_t> small, large, rest;
    for (std::int32_t b = 0; b < std::int32_t(inst.bidders.size()); ++b) {
      const double u = rng.uniform();
      if (u < 0.3) {
        small.push_back(b);
        large.push_back(b);
      } else if (u < 0.6) {
        large.push_back(b);
      } else {
        rest.push_back(b);
      }
    }
    if (rest.empty()) continue;
    const std::int32_t v = rest[std::size_t(rng.below(rest.size()))];
    const double f_small = rr.estimate(small, inst.bidders);
    const double f_large = rr.estimate(large, inst.bidders);
    CHECK(f_small <= f_large + 1e-12);
    auto small_v = small;
    small_v.push_back(v);
    auto large_v = large;
    large_v.push_back(v);
    const double gain_small = rr.estimate(small_v, inst.bidders) - f_small;
    const double gain_large = rr.estimate(large_v, inst.bidders) - f_large;
    CHECK(gain_small >= gain_large - 1e-12);
  }
}

TEST_CASE("binary dump round trip") {
  auto inst = random_instance({.nodes = 8, .edges = 16, .tasks = 2, .users = 5},
                              97);
  RrCollection rr(inst.graph, 15);
  rr.extend(200);
  std::stringstream buf;
  rr.dump(buf);
  const RrCollection loaded = RrCollection::load(buf, inst.graph);
  CHECK(loaded.same_sets(rr));
  const std::vector<std::int32_t> set = {0, 1};
  CHECK(loaded.estimate(set, inst.bidders) == rr.estimate(set, inst.bidders));
}
