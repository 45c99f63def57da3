#include "crowdcast/generators.hpp"

#include <stdexcept>

#include "crowdcast/rng.hpp"

namespace crowdcast {

GraphSkeleton uniform_random_graph(std::int32_t node_count,
                                   std::int32_t edge_count, std::uint64_t seed) {
  if (node_count < 1) throw std::invalid_argument("need at least one node");
  if (edge_count < 0) throw std::invalid_argument("edge count must be nonnegative");
  Rng rng(hash_streams(seed, 0x67656e /* "gen" */, 1));
  std::vector<NodeId> src(static_cast<std::size_t>(edge_count));
  std::vector<NodeId> dst(static_cast<std::size_t>(edge_count));
  for (std::int32_t e = 0; e < edge_count; ++e) {
    src[std::size_t(e)] = NodeId(rng.below(std::uint64_t(node_count)));
    dst[std::size_t(e)] = NodeId(rng.below(std::uint64_t(node_count)));
  }
  return GraphSkeleton::from_edges(node_count, std::move(src), std::move(dst));
}

GraphSkeleton preferential_attachment_graph(std::int32_t node_count,
                                            std::int32_t edges_per_node,
                                            std::uint64_t seed,
                                            double forward_prob) {
  if (node_count < 2) throw std::invalid_argument("need at least two nodes");
  if (edges_per_node < 1) throw std::invalid_argument("need at least one edge per node");

  Rng rng(hash_streams(seed, 0x67656e /* "gen" */, 2));
  std::vector<NodeId> src, dst;
  src.reserve(std::size_t(node_count) * std::size_t(edges_per_node));
  dst.reserve(src.capacity());

  // endpoints holds one entry per degree unit plus one baseline entry per
  // node, so sampling an entry uniformly is degree-plus-one proportional.
  std::vector<NodeId> endpoints;
  endpoints.reserve(2 * src.capacity() + std::size_t(node_count));
  endpoints.push_back(0);

  for (NodeId t = 1; t < node_count; ++t) {
    for (std::int32_t k = 0; k < edges_per_node; ++k) {
      const NodeId other = endpoints[std::size_t(rng.below(endpoints.size()))];
      const bool forward = rng.bernoulli(forward_prob);
      src.push_back(forward ? other : t);
      dst.push_back(forward ? t : other);
      endpoints.push_back(other);
    }
    endpoints.push_back(t);
    for (std::int32_t k = 0; k < edges_per_node; ++k) endpoints.push_back(t);
  }
  return GraphSkeleton::from_edges(node_count, std::move(src), std::move(dst));
}

}  // namespace crowdcast
