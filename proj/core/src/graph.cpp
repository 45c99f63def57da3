#include "crowdcast/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>

#include "crowdcast/rng.hpp"

namespace crowdcast {

GraphSkeleton GraphSkeleton::from_edges(std::int32_t node_count,
                                        std::vector<NodeId> src,
                                        std::vector<NodeId> dst) {
  if (node_count < 1) throw std::invalid_argument("graph needs at least one node");
  if (src.size() != dst.size())
    throw std::invalid_argument("src/dst arrays differ in length");

  GraphSkeleton g;
  g.node_count = node_count;
  g.edge_count = std::int32_t(src.size());
  for (std::size_t e = 0; e < src.size(); ++e) {
    if (src[e] < 0 || src[e] >= node_count || dst[e] < 0 || dst[e] >= node_count)
      throw std::out_of_range("edge endpoint outside [0, node_count)");
  }
  g.src = std::move(src);
  g.dst = std::move(dst);

  auto build_csr = [&](const std::vector<NodeId>& keys,
                       const std::vector<NodeId>& values,
                       std::vector<std::int32_t>& offsets,
                       std::vector<NodeId>& nbr, std::vector<EdgeId>& edge) {
    offsets.assign(std::size_t(node_count) + 1, 0);
    for (NodeId k : keys) offsets[std::size_t(k) + 1]++;
    for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    nbr.resize(keys.size());
    edge.resize(keys.size());
    std::vector<std::int32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t e = 0; e < keys.size(); ++e) {
      const auto pos = std::size_t(cursor[keys[e]]++);
      nbr[pos] = values[e];
      edge[pos] = EdgeId(e);
    }
  };
  build_csr(g.src, g.dst, g.out_offsets, g.out_nbr, g.out_edge);
  build_csr(g.dst, g.src, g.in_offsets, g.in_nbr, g.in_edge);
  return g;
}

namespace {

bool blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

}  // namespace

GraphSkeleton load_edge_list(std::istream& in,
                             std::optional<std::int32_t> node_count_hint) {
  std::vector<NodeId> src, dst;
  std::string line;
  std::int64_t max_id = -1;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;

    const char* p = line.c_str();
    char* end = nullptr;
    std::int64_t ids[2];
    for (int k = 0; k < 2; ++k) {
      const std::int64_t v = std::strtoll(p, &end, 10);
      if (end == p)
        throw std::runtime_error("edge list parse error at line " +
                                 std::to_string(line_no) + ": expected integer id");
      if (v < 0)
        throw std::runtime_error("edge list parse error at line " +
                                 std::to_string(line_no) + ": negative node id");
      ids[k] = v;
      p = end;
    }
    // Optional third column (ignored); anything further is malformed.
    std::strtod(p, &end);
    p = end;
    while (*p != '\0' && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (*p != '\0')
      throw std::runtime_error("edge list parse error at line " +
                               std::to_string(line_no) + ": trailing tokens");
    if (ids[0] > INT32_MAX || ids[1] > INT32_MAX)
      throw std::runtime_error("edge list parse error at line " +
                               std::to_string(line_no) + ": id exceeds 32-bit range");

    src.push_back(NodeId(ids[0]));
    dst.push_back(NodeId(ids[1]));
    max_id = std::max({max_id, ids[0], ids[1]});
  }

  std::int32_t n = std::int32_t(max_id + 1);
  if (node_count_hint) n = std::max(n, *node_count_hint);
  if (n < 1) n = 1;
  return GraphSkeleton::from_edges(n, std::move(src), std::move(dst));
}

GraphSkeleton load_edge_list_file(const std::string& path,
                                  std::optional<std::int32_t> node_count_hint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  return load_edge_list(in, node_count_hint);
}

LocationMap::LocationMap(double area_side, double block_side)
    : area_side_(area_side), block_side_(block_side) {
  if (!(area_side > 0.0) || !(block_side > 0.0))
    throw std::invalid_argument("area and block sides must be positive");
  const double ratio = area_side / block_side;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 1.0)
    throw std::invalid_argument("block side must divide area side evenly");
  blocks_per_side_ = std::int32_t(rounded);
}

std::int32_t LocationMap::subarea_of(double x, double y) const {
  if (!(x >= 0.0) || !(y >= 0.0) || x > area_side_ || y > area_side_)
    throw std::out_of_range("coordinate outside the area");
  auto block = [&](double c) {
    auto b = std::int32_t(c / block_side_);
    return std::min(b, blocks_per_side_ - 1);  // upper boundary clamp
  };
  return block(x) + blocks_per_side_ * block(y);
}

TaskGraph::TaskGraph(GraphSkeleton skeleton,
                     std::vector<std::vector<double>> edge_weights,
                     std::vector<double> loc_x, std::vector<double> loc_y,
                     LocationMap grid, std::vector<std::vector<double>> quality)
    : skeleton_(std::move(skeleton)),
      edge_weights_(std::move(edge_weights)),
      loc_x_(std::move(loc_x)),
      loc_y_(std::move(loc_y)),
      grid_(grid),
      quality_(std::move(quality)) {
  const auto n = std::size_t(skeleton_.node_count);
  const auto m = std::size_t(skeleton_.edge_count);
  const std::size_t n_tasks = edge_weights_.size();

  if (n_tasks < 1) throw std::invalid_argument("need at least one task layer");
  if (quality_.size() != n_tasks)
    throw std::invalid_argument("quality matrix must have one row per task");
  if (loc_x_.size() != n || loc_y_.size() != n)
    throw std::invalid_argument("need one location per node");

  for (const auto& row : edge_weights_) {
    if (row.size() != m)
      throw std::invalid_argument("weight row length must equal edge count");
    for (double w : row)
      if (!(w >= 0.0 && w <= 1.0))
        throw std::invalid_argument("edge weights must lie in [0,1]");
  }
  const auto n_sub = std::size_t(grid_.subarea_count());
  for (const auto& row : quality_) {
    if (row.size() != n_sub)
      throw std::invalid_argument("quality row length must equal subarea count");
    for (double q : row)
      if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("qualities must lie in [0,1]");
  }

  node_subarea_.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    node_subarea_[v] = grid_.subarea_of(loc_x_[v], loc_y_[v]);

  quality_mass_.assign(n_tasks, 0.0);
  for (std::size_t j = 0; j < n_tasks; ++j) {
    double mass = 0.0;
    for (std::size_t v = 0; v < n; ++v) mass += quality_[j][node_subarea_[v]];
    quality_mass_[j] = mass;
  }
}

double TaskGraph::max_quality_mass() const {
  return *std::max_element(quality_mass_.begin(), quality_mass_.end());
}

std::vector<std::vector<double>> assign_uniform_layers(
    const GraphSkeleton& skeleton, std::span<const double> per_task_probability) {
  if (per_task_probability.empty())
    throw std::invalid_argument("need at least one task probability");
  std::vector<std::vector<double>> weights;
  weights.reserve(per_task_probability.size());
  for (double p : per_task_probability) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("task probability must lie in [0,1]");
    weights.emplace_back(std::size_t(skeleton.edge_count), p);
  }
  return weights;
}

namespace {
constexpr std::uint64_t kLocationStream = 0x4c4f43;  // "LOC"
constexpr std::uint64_t kQualityStream = 0x51554c;   // "QUL"
}  // namespace

TaskGraph synthesize_scenario(GraphSkeleton skeleton, const ScenarioParams& params,
                              std::uint64_t rng_seed) {
  LocationMap grid(params.area_side, params.block_side);
  auto weights = assign_uniform_layers(skeleton, params.task_probabilities);

  const std::uint64_t loc_seed =
      params.location_seed.value_or(hash_streams(rng_seed, kLocationStream));
  const std::uint64_t qual_seed =
      params.quality_seed.value_or(hash_streams(rng_seed, kQualityStream));

  const auto n = std::size_t(skeleton.node_count);
  std::vector<double> xs(n), ys(n);
  Rng loc_rng(loc_seed);
  for (std::size_t v = 0; v < n; ++v) {
    xs[v] = loc_rng.uniform(0.0, params.area_side);
    ys[v] = loc_rng.uniform(0.0, params.area_side);
  }

  Rng qual_rng(qual_seed);
  const std::size_t n_tasks = params.task_probabilities.size();
  std::vector<std::vector<double>> quality(n_tasks);
  for (auto& row : quality) {
    row.resize(std::size_t(grid.subarea_count()));
    for (double& q : row) q = qual_rng.uniform();
  }

  return TaskGraph(std::move(skeleton), std::move(weights), std::move(xs),
                   std::move(ys), grid, std::move(quality));
}

}  // namespace crowdcast
