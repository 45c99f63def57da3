#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crowdcast {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using TaskId = std::int32_t;

/// Immutable directed multigraph with CSR adjacency in both directions.
/// Edge ids follow input order; parallel edges and self loops are retained,
/// each parallel edge acting as an independent diffusion coin.
struct GraphSkeleton {
  std::int32_t node_count = 0;
  std::int32_t edge_count = 0;

  // Edge arrays indexed by EdgeId, in input order.
  std::vector<NodeId> src;
  std::vector<NodeId> dst;

  // CSR layout. out_nbr/out_edge hold (neighbor, edge id) pairs and likewise
  // for the reverse direction; in_* is the exact transpose of out_*.
  std::vector<std::int32_t> out_offsets;
  std::vector<NodeId> out_nbr;
  std::vector<EdgeId> out_edge;
  std::vector<std::int32_t> in_offsets;
  std::vector<NodeId> in_nbr;
  std::vector<EdgeId> in_edge;

  static GraphSkeleton from_edges(std::int32_t node_count,
                                  std::vector<NodeId> src,
                                  std::vector<NodeId> dst);

  std::span<const NodeId> out_neighbors(NodeId u) const {
    return {out_nbr.data() + out_offsets[u],
            out_nbr.data() + out_offsets[u + 1]};
  }
  std::span<const EdgeId> out_edges(NodeId u) const {
    return {out_edge.data() + out_offsets[u],
            out_edge.data() + out_offsets[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_nbr.data() + in_offsets[v], in_nbr.data() + in_offsets[v + 1]};
  }
  std::span<const EdgeId> in_edges(NodeId v) const {
    return {in_edge.data() + in_offsets[v], in_edge.data() + in_offsets[v + 1]};
  }
  std::int32_t out_degree(NodeId u) const {
    return out_offsets[u + 1] - out_offsets[u];
  }
};

/// Parses a whitespace-separated edge list: one `u v` or `u v w` edge per
/// line, 0-based ids, `#` comments and blank lines ignored. The trailing
/// column, when present, is ignored (weights come from the task layers).
/// Node count is 1 + the largest id seen, or the hint if larger.
GraphSkeleton load_edge_list(std::istream& in,
                             std::optional<std::int32_t> node_count_hint = {});
GraphSkeleton load_edge_list_file(const std::string& path,
                                  std::optional<std::int32_t> node_count_hint = {});

/// Square area split into square blocks; maps coordinates to subarea indices.
/// Coordinates exactly on the upper boundary clamp into the last block so the
/// mapping is total on [0, area_side]^2.
class LocationMap {
 public:
  LocationMap(double area_side, double block_side);

  double area_side() const noexcept { return area_side_; }
  double block_side() const noexcept { return block_side_; }
  std::int32_t blocks_per_side() const noexcept { return blocks_per_side_; }
  std::int32_t subarea_count() const noexcept {
    return blocks_per_side_ * blocks_per_side_;
  }

  std::int32_t subarea_of(double x, double y) const;

 private:
  double area_side_ = 0.0;
  double block_side_ = 0.0;
  std::int32_t blocks_per_side_ = 0;
};

/// The full diffusion instance: graph, one edge-weight row per task, node
/// locations on a grid, and the per-task per-subarea completion qualities.
/// Immutable after construction and safe for concurrent reads.
class TaskGraph {
 public:
  /// Validates all invariants: weight matrix is [task_count x edge_count]
  /// with entries in [0,1], quality is [task_count x subarea_count] with
  /// entries in [0,1], every node has an in-area location.
  TaskGraph(GraphSkeleton skeleton, std::vector<std::vector<double>> edge_weights,
            std::vector<double> loc_x, std::vector<double> loc_y,
            LocationMap grid, std::vector<std::vector<double>> quality);

  const GraphSkeleton& skeleton() const noexcept { return skeleton_; }
  std::int32_t node_count() const noexcept { return skeleton_.node_count; }
  std::int32_t edge_count() const noexcept { return skeleton_.edge_count; }
  std::int32_t task_count() const noexcept {
    return std::int32_t(edge_weights_.size());
  }
  const LocationMap& grid() const noexcept { return grid_; }

  double edge_weight(TaskId task, EdgeId e) const {
    return edge_weights_[task][e];
  }
  std::span<const double> layer_weights(TaskId task) const {
    return edge_weights_[task];
  }

  double location_x(NodeId v) const { return loc_x_[v]; }
  double location_y(NodeId v) const { return loc_y_[v]; }

  /// Subarea index of a node (the cached location mapping).
  std::int32_t location_of(NodeId v) const { return node_subarea_[v]; }

  double quality(TaskId task, std::int32_t subarea) const {
    return quality_[task][subarea];
  }
  /// q_task at the node's subarea.
  double node_quality(TaskId task, NodeId v) const {
    return quality_[task][node_subarea_[v]];
  }
  /// Sum of node_quality over all nodes; the scaling constant of the
  /// coverage estimator for this task.
  double task_quality_mass(TaskId task) const { return quality_mass_[task]; }
  double max_quality_mass() const;

 private:
  GraphSkeleton skeleton_;
  std::vector<std::vector<double>> edge_weights_;
  std::vector<double> loc_x_, loc_y_;
  LocationMap grid_;
  std::vector<std::vector<double>> quality_;
  std::vector<std::int32_t> node_subarea_;
  std::vector<double> quality_mass_;
};

/// Constant per-task edge weights: row j of the result is filled with
/// per_task_probability[j].
std::vector<std::vector<double>> assign_uniform_layers(
    const GraphSkeleton& skeleton, std::span<const double> per_task_probability);

/// Scenario synthesis knobs; see synthesize_scenario.
struct ScenarioParams {
  double area_side = 1000.0;
  double block_side = 100.0;
  std::vector<double> task_probabilities;
  /// Optional explicit seeds for the two synthesis substreams; when absent
  /// they derive from the master seed passed to synthesize_scenario.
  std::optional<std::uint64_t> quality_seed;
  std::optional<std::uint64_t> location_seed;
};

/// Builds a TaskGraph with uniform layer weights, uniformly random node
/// locations in the area, and uniformly random per-(task, subarea) qualities
/// in [0,1]. Pure function of (skeleton, params, rng_seed).
TaskGraph synthesize_scenario(GraphSkeleton skeleton, const ScenarioParams& params,
                              std::uint64_t rng_seed);

}  // namespace crowdcast
