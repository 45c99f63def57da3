#include "crowdcast/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace crowdcast {

double DiffusionEstimate::standard_error() const {
  return samples > 0 ? stddev / std::sqrt(double(samples)) : 0.0;
}

namespace {

constexpr std::uint64_t kSimStream = 0x73696d;  // "sim"

/// Reusable cascade scratch: epoch-stamped activation marks avoid clearing.
struct CascadeScratch {
  std::vector<std::uint32_t> mark;
  std::uint32_t epoch = 0;
  std::vector<NodeId> frontier, next;

  void resize(std::size_t n) { mark.assign(n, 0); epoch = 0; }

  bool active(NodeId v) const { return mark[std::size_t(v)] == epoch; }
  void activate(NodeId v) { mark[std::size_t(v)] = epoch; }

  /// Runs one cascade and returns the summed node quality of the activated
  /// set (also fills `activated` when non-null).
  double run(const TaskGraph& graph, std::span<const NodeId> seeds, TaskId task,
             Rng& rng, std::vector<NodeId>* activated) {
    ++epoch;
    if (epoch == 0) {  // wrapped; re-zero once every 2^32 cascades
      std::fill(mark.begin(), mark.end(), 0);
      epoch = 1;
    }
    frontier.assign(seeds.begin(), seeds.end());
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());

    double value = 0.0;
    for (NodeId v : frontier) {
      activate(v);
      value += graph.node_quality(task, v);
      if (activated) activated->push_back(v);
    }
    const auto& skel = graph.skeleton();
    const auto weights = graph.layer_weights(task);
    while (!frontier.empty()) {
      next.clear();
      for (NodeId u : frontier) {
        const auto nbrs = skel.out_neighbors(u);
        const auto edges = skel.out_edges(u);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
          const NodeId v = nbrs[k];
          if (active(v)) continue;
          if (rng.bernoulli(weights[edges[k]])) {
            activate(v);
            value += graph.node_quality(task, v);
            if (activated) activated->push_back(v);
            next.push_back(v);
          }
        }
      }
      std::sort(next.begin(), next.end());
      std::swap(frontier, next);
    }
    return value;
  }
};

}  // namespace

std::vector<NodeId> simulate_once(const TaskGraph& graph,
                                  std::span<const NodeId> seeds, TaskId task,
                                  Rng& rng) {
  if (task < 0 || task >= graph.task_count())
    throw std::out_of_range("task index out of range");
  for (NodeId v : seeds)
    if (v < 0 || v >= graph.node_count())
      throw std::out_of_range("seed node out of range");
  CascadeScratch scratch;
  scratch.resize(std::size_t(graph.node_count()));
  std::vector<NodeId> activated;
  scratch.run(graph, seeds, task, rng, &activated);
  std::sort(activated.begin(), activated.end());
  return activated;
}

DiffusionEstimate mc_estimate(const TaskGraph& graph,
                              std::span<const std::int32_t> seed_bidders,
                              const BidderProfile& bidders,
                              std::int64_t num_sims, std::uint64_t seed,
                              int threads) {
  if (num_sims < 1) throw std::invalid_argument("need at least one simulation");
  const std::int32_t n_tasks = graph.task_count();

  std::vector<std::vector<NodeId>> projections(static_cast<std::size_t>(n_tasks));
  bool any_seed = false;
  for (TaskId j = 0; j < n_tasks; ++j) {
    projections[std::size_t(j)] = project_seeds(seed_bidders, bidders, j);
    any_seed |= !projections[std::size_t(j)].empty();
  }
  if (!any_seed) return {0.0, num_sims, 0.0};

  std::vector<double> values(static_cast<std::size_t>(num_sims));
  auto worker = [&](std::int64_t begin, std::int64_t end) {
    CascadeScratch scratch;
    scratch.resize(std::size_t(graph.node_count()));
    for (std::int64_t s = begin; s < end; ++s) {
      double v = 0.0;
      for (TaskId j = 0; j < n_tasks; ++j) {
        Rng rng = Rng::substream(seed, kSimStream, std::uint64_t(s), std::uint64_t(j));
        v += scratch.run(graph, projections[std::size_t(j)], j, rng, nullptr);
      }
      values[std::size_t(s)] = v / double(n_tasks);
    }
  };

  if (threads <= 1 || num_sims < 256) {
    worker(0, num_sims);
  } else {
    const int t = std::min<std::int64_t>(threads, num_sims);
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(t));
    for (int i = 0; i < t; ++i) {
      const std::int64_t begin = num_sims * i / t;
      const std::int64_t end = num_sims * (i + 1) / t;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(num_sims);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double stddev =
      num_sims > 1 ? std::sqrt(ss / double(num_sims - 1)) : 0.0;
  return {mean, num_sims, stddev};
}

double exact_layer_value(const TaskGraph& graph, std::span<const NodeId> seeds,
                         TaskId task, int max_free_edges) {
  if (task < 0 || task >= graph.task_count())
    throw std::out_of_range("task index out of range");
  if (seeds.empty()) return 0.0;

  const auto& skel = graph.skeleton();
  const auto weights = graph.layer_weights(task);

  // Fractional-weight edges are enumerated; 0/1 edges are fixed.
  std::vector<EdgeId> free_edges;
  for (EdgeId e = 0; e < skel.edge_count; ++e) {
    const double w = weights[std::size_t(e)];
    if (w > 0.0 && w < 1.0) free_edges.push_back(e);
  }
  if (int(free_edges.size()) > max_free_edges)
    throw std::length_error(
        "layer has " + std::to_string(free_edges.size()) +
        " fractional-weight edges, above the enumeration cap of " +
        std::to_string(max_free_edges) + "; use mc_estimate instead");

  std::vector<std::int32_t> free_index(std::size_t(skel.edge_count), -1);
  for (std::size_t i = 0; i < free_edges.size(); ++i)
    free_index[std::size_t(free_edges[i])] = std::int32_t(i);

  std::vector<NodeId> base(seeds.begin(), seeds.end());
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());

  std::vector<char> active(static_cast<std::size_t>(skel.node_count));
  std::vector<NodeId> stack;
  double total = 0.0;

  const std::uint64_t realizations = 1ull << free_edges.size();
  for (std::uint64_t mask = 0; mask < realizations; ++mask) {
    double prob = 1.0;
    for (std::size_t i = 0; i < free_edges.size(); ++i) {
      const double w = weights[std::size_t(free_edges[i])];
      prob *= ((mask >> i) & 1ull) ? w : (1.0 - w);
    }

    std::fill(active.begin(), active.end(), 0);
    stack.assign(base.begin(), base.end());
    double value = 0.0;
    for (NodeId v : stack) {
      active[std::size_t(v)] = 1;
      value += graph.node_quality(task, v);
    }
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      const auto nbrs = skel.out_neighbors(u);
      const auto edges = skel.out_edges(u);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const NodeId v = nbrs[k];
        if (active[std::size_t(v)]) continue;
        const EdgeId e = edges[k];
        const std::int32_t fi = free_index[std::size_t(e)];
        const bool live =
            fi >= 0 ? ((mask >> fi) & 1ull) != 0 : weights[std::size_t(e)] == 1.0;
        if (!live) continue;
        active[std::size_t(v)] = 1;
        value += graph.node_quality(task, v);
        stack.push_back(v);
      }
    }
    total += prob * value;
  }
  return total;
}

double exact_value(const TaskGraph& graph,
                   std::span<const std::int32_t> seed_bidders,
                   const BidderProfile& bidders, int max_free_edges) {
  double total = 0.0;
  for (TaskId j = 0; j < graph.task_count(); ++j) {
    const auto projection = project_seeds(seed_bidders, bidders, j);
    total += exact_layer_value(graph, projection, j, max_free_edges);
  }
  return total / double(graph.task_count());
}

}  // namespace crowdcast
