#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "crowdcast/bidders.hpp"
#include "crowdcast/graph.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

/// One reverse-reachable sample: a task drawn uniformly, a root drawn from
/// that task's quality-weighted node distribution, and every node that reaches
/// the root through live in-edges of one sampled realization of the layer.
struct RrSet {
  TaskId task = 0;
  NodeId root = 0;
  std::vector<NodeId> nodes;  ///< contains root; unique, in discovery order
};

/// Draws one reverse-reachable set. Tasks with zero quality mass are redrawn;
/// throws std::domain_error when every task has zero mass (the diffusion
/// value is identically zero then).
RrSet sample_rr_set(const TaskGraph& graph, Rng& rng);

/// An ordered collection of reverse-reachable sets with an inverted
/// node-to-sets index. Set x is always generated from substream
/// (seed, stream_tag, x), so extending to a target size yields identical
/// collections no matter how the growth was scheduled or threaded.
class RrCollection {
 public:
  RrCollection(const TaskGraph& graph, std::uint64_t seed,
               std::uint64_t stream_tag = 0);

  /// Appends fresh sets until size() == target. Existing sets are untouched.
  void extend(std::size_t target, int threads = 1);

  std::size_t size() const noexcept { return sets_.size(); }
  const RrSet& set(std::size_t x) const { return sets_[x]; }

  /// Scaling weight of set x: the quality mass of its generating task.
  double set_weight(std::size_t x) const { return task_mass_[std::size_t(sets_[x].task)]; }
  double task_mass(TaskId task) const { return task_mass_[std::size_t(task)]; }
  double max_task_mass() const noexcept { return max_mass_; }
  std::int32_t task_count() const noexcept { return std::int32_t(task_mass_.size()); }

  /// Indices of sets whose node list contains v. The claims filter is applied
  /// by the queries, not here, so one collection serves every bidder profile.
  std::span<const std::uint32_t> sets_containing(NodeId v) const {
    return member_of_[std::size_t(v)];
  }

  const TaskGraph& graph() const noexcept { return *graph_; }

  /// The coverage estimator: mean over sets of set_weight(x) for the sets
  /// whose generating task is claimed by some selected bidder in the set.
  /// Computed from scratch; use CoverageState inside greedy loops.
  double estimate(std::span<const std::int32_t> seed_bidders,
                  const BidderProfile& bidders) const;

  bool same_sets(const RrCollection& other) const;

  /// Little-endian binary dump: u64 size, u32 task count, then per set
  /// u32 task, u32 root, u32 node count, u32 node ids.
  void dump(std::ostream& out) const;
  static RrCollection load(std::istream& in, const TaskGraph& graph);

 private:
  void append_set(RrSet set);

  const TaskGraph* graph_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_tag_ = 0;
  std::vector<RrSet> sets_;
  std::vector<std::vector<std::uint32_t>> member_of_;
  std::vector<double> task_mass_;
  double max_mass_ = 0.0;
  std::vector<std::optional<AliasTable>> root_samplers_;  // per task
};

/// Incremental coverage bookkeeping for greedy selection over one collection
/// and one bidder profile. Tracks, per (bidder, task), how many still-
/// uncovered sets that bidder would cover; gains are therefore exact integer
/// counts scaled by the per-task mass. Single-threaded, caller owned.
class CoverageState {
 public:
  CoverageState(const RrCollection& collection, const BidderProfile& bidders);

  /// Estimator value of the selected set.
  double covered_value() const { return covered_mass_ / double(theta_); }

  /// Marginal estimator gain of adding the bidder to the current selection.
  double gain(std::size_t bidder) const;

  /// Sum of the k largest current gains over all bidders.
  double top_gain_sum(std::size_t k) const;

  /// Marks every set newly covered by this bidder and updates all gains.
  void add(std::size_t bidder);

  const std::vector<std::int32_t>& selected() const noexcept { return selected_; }
  bool is_selected(std::size_t bidder) const { return in_set_[bidder] != 0; }
  std::size_t bidder_count() const noexcept { return in_set_.size(); }

  /// Number of gain() calls since construction (complexity probes).
  std::uint64_t gain_queries() const noexcept { return gain_queries_; }

 private:
  const RrCollection* rr_;
  const BidderProfile* bidders_;
  std::size_t theta_;
  std::int32_t n_tasks_;
  std::vector<std::int32_t> node_to_bidder_;
  std::vector<std::uint8_t> covered_;
  std::vector<std::int32_t> uncovered_counts_;  // [bidder * n_tasks + task]
  double covered_mass_ = 0.0;
  std::vector<std::int32_t> selected_;
  std::vector<std::uint8_t> in_set_;
  mutable std::uint64_t gain_queries_ = 0;
};

}  // namespace crowdcast
