#pragma once

#include <cstdint>

#include "crowdcast/graph.hpp"

namespace crowdcast {

/// Uniform directed multigraph with exactly edge_count edges (self loops and
/// parallel edges possible, matching what raw retweet data looks like).
GraphSkeleton uniform_random_graph(std::int32_t node_count,
                                   std::int32_t edge_count, std::uint64_t seed);

/// Degree-driven attachment: node t arrives with edges_per_node edges whose
/// other endpoint is sampled proportionally to (degree + 1) among nodes < t,
/// oriented away from the sampled endpoint with probability forward_prob.
/// Produces the heavy out-degree tail typical of retweet graphs.
GraphSkeleton preferential_attachment_graph(std::int32_t node_count,
                                            std::int32_t edges_per_node,
                                            std::uint64_t seed,
                                            double forward_prob = 0.5);

}  // namespace crowdcast
