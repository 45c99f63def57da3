#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdcast/graph.hpp"

namespace crowdcast {

/// Registered users with their claimed task sets and bid prices. This is the
/// only data the mechanism is allowed to read; private costs live in
/// PrivateCosts and are consumed solely by the truthfulness probes.
struct BidderProfile {
  std::vector<NodeId> users;            ///< node id of each bidder
  std::vector<std::uint32_t> claims;    ///< claimed-task bitmask per bidder
  std::vector<double> bids;             ///< bid price per bidder, > 0

  std::size_t size() const noexcept { return users.size(); }

  bool claims_task(std::size_t bidder, TaskId task) const noexcept {
    return (claims[bidder] >> task) & 1u;
  }
  std::int32_t claimed_count(std::size_t bidder) const noexcept {
    return std::int32_t(__builtin_popcount(claims[bidder]));
  }

  /// Checks ids are unique and in range, bids positive, claims within the
  /// task range. Throws std::invalid_argument on violation.
  void validate(std::int32_t node_count, std::int32_t task_count) const;

  /// node -> bidder index, -1 where the node is not registered.
  std::vector<std::int32_t> node_to_bidder(std::int32_t node_count) const;
};

/// Private costs, one per bidder; deliberately separate from BidderProfile.
struct PrivateCosts {
  std::vector<double> cost;
};

/// Tasks no bidder claims; such layers never activate anything and the
/// caller may prune them from the published task set.
std::vector<TaskId> unclaimed_tasks(const BidderProfile& bidders,
                                    std::int32_t task_count);

/// The per-task projection of a seed set: node ids of the selected bidders
/// that claim the given task.
std::vector<NodeId> project_seeds(std::span<const std::int32_t> seed_bidders,
                                  const BidderProfile& bidders, TaskId task);

}  // namespace crowdcast
