#include "crowdcast/bidders.hpp"

#include <stdexcept>

namespace crowdcast {

void BidderProfile::validate(std::int32_t node_count,
                             std::int32_t task_count) const {
  if (claims.size() != users.size() || bids.size() != users.size())
    throw std::invalid_argument("bidder arrays differ in length");
  std::vector<char> seen(std::size_t(node_count), 0);
  const std::uint32_t task_mask =
      task_count >= 32 ? ~0u : ((1u << task_count) - 1u);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const NodeId v = users[i];
    if (v < 0 || v >= node_count)
      throw std::invalid_argument("bidder node id out of range");
    if (seen[std::size_t(v)])
      throw std::invalid_argument("duplicate bidder node id");
    seen[std::size_t(v)] = 1;
    if (!(bids[i] > 0.0)) throw std::invalid_argument("bids must be positive");
    if (claims[i] & ~task_mask)
      throw std::invalid_argument("claim bitmask references unknown task");
  }
}

std::vector<std::int32_t> BidderProfile::node_to_bidder(
    std::int32_t node_count) const {
  std::vector<std::int32_t> map(std::size_t(node_count), -1);
  for (std::size_t i = 0; i < users.size(); ++i)
    map[std::size_t(users[i])] = std::int32_t(i);
  return map;
}

std::vector<TaskId> unclaimed_tasks(const BidderProfile& bidders,
                                    std::int32_t task_count) {
  std::uint32_t covered = 0;
  for (std::uint32_t mask : bidders.claims) covered |= mask;
  std::vector<TaskId> missing;
  for (TaskId j = 0; j < task_count; ++j)
    if (!((covered >> j) & 1u)) missing.push_back(j);
  return missing;
}

std::vector<NodeId> project_seeds(std::span<const std::int32_t> seed_bidders,
                                  const BidderProfile& bidders, TaskId task) {
  std::vector<NodeId> nodes;
  nodes.reserve(seed_bidders.size());
  for (std::int32_t b : seed_bidders)
    if (bidders.claims_task(std::size_t(b), task))
      nodes.push_back(bidders.users[std::size_t(b)]);
  return nodes;
}

}  // namespace crowdcast
