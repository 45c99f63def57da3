#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdcast/bidders.hpp"
#include "crowdcast/graph.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

/// Mean/spread of a Monte Carlo diffusion-value estimate.
struct DiffusionEstimate {
  double mean = 0.0;
  std::int64_t samples = 0;
  double stddev = 0.0;  ///< sample standard deviation (0 when samples < 2)

  double standard_error() const;
};

/// One forward cascade on a single task layer. Seeds activate at step 0;
/// each newly activated node gets one coin per out-edge to a still-inactive
/// neighbor. Nodes within a frontier are processed in ascending id so a fixed
/// rng gives a bit-reproducible run. Returns the activated set.
std::vector<NodeId> simulate_once(const TaskGraph& graph,
                                  std::span<const NodeId> seeds, TaskId task,
                                  Rng& rng);

/// Monte Carlo estimate of the task-averaged diffusion value of a seed set:
/// each simulation runs one fresh cascade per task on that task's projection
/// and scores activated nodes by their subarea quality. Simulation s of task j
/// draws from substream (seed, s, j), so results do not depend on threading.
DiffusionEstimate mc_estimate(const TaskGraph& graph,
                              std::span<const std::int32_t> seed_bidders,
                              const BidderProfile& bidders,
                              std::int64_t num_sims, std::uint64_t seed,
                              int threads = 1);

/// Exact diffusion value by enumerating the live-edge realizations of every
/// layer. Edges with weight 0 or 1 are fixed; an enumeration with more than
/// max_free_edges fractional-weight edges in some layer throws
/// std::length_error (use mc_estimate instead at that size).
double exact_value(const TaskGraph& graph,
                   std::span<const std::int32_t> seed_bidders,
                   const BidderProfile& bidders, int max_free_edges = 25);

/// Exact expected quality reached by the given seed nodes on one layer
/// (no 1/task_count averaging). exact_value(S) equals the mean over tasks of
/// exact_layer_value on the task's projection.
double exact_layer_value(const TaskGraph& graph, std::span<const NodeId> seeds,
                         TaskId task, int max_free_edges = 25);

}  // namespace crowdcast
