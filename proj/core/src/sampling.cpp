#include "crowdcast/sampling.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace crowdcast {

namespace {

constexpr std::uint64_t kRrStream = 0x7272;  // "rr"

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  write_u32(out, std::uint32_t(v));
  write_u32(out, std::uint32_t(v >> 32));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated reverse-set dump");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

std::uint64_t read_u64(std::istream& in) {
  const std::uint64_t lo = read_u32(in);
  const std::uint64_t hi = read_u32(in);
  return lo | hi << 32;
}

struct ReverseScratch {
  std::vector<std::uint32_t> mark;
  std::uint32_t epoch = 0;
  std::vector<NodeId> queue;

  void resize(std::size_t n) { mark.assign(n, 0); epoch = 0; }

  RrSet sample(const TaskGraph& graph,
               const std::vector<std::optional<AliasTable>>& samplers, Rng& rng) {
    const std::int32_t n_tasks = graph.task_count();
    TaskId task;
    do {
      task = TaskId(rng.below(std::uint64_t(n_tasks)));
    } while (!samplers[std::size_t(task)].has_value());

    RrSet out;
    out.task = task;
    out.root = NodeId(samplers[std::size_t(task)]->sample(rng));

    ++epoch;
    if (epoch == 0) {
      std::fill(mark.begin(), mark.end(), 0);
      epoch = 1;
    }
    mark[std::size_t(out.root)] = epoch;
    out.nodes.push_back(out.root);
    queue.assign(1, out.root);

    const auto& skel = graph.skeleton();
    const auto weights = graph.layer_weights(task);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      const auto nbrs = skel.in_neighbors(v);
      const auto edges = skel.in_edges(v);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const NodeId u = nbrs[k];
        if (mark[std::size_t(u)] == epoch) continue;
        if (rng.bernoulli(weights[std::size_t(edges[k])])) {
          mark[std::size_t(u)] = epoch;
          out.nodes.push_back(u);
          queue.push_back(u);
        }
      }
    }
    return out;
  }
};

std::vector<std::optional<AliasTable>> build_root_samplers(const TaskGraph& graph) {
  const std::int32_t n_tasks = graph.task_count();
  std::vector<std::optional<AliasTable>> samplers(static_cast<std::size_t>(n_tasks));
  bool any = false;
  std::vector<double> weights(std::size_t(graph.node_count()));
  for (TaskId j = 0; j < n_tasks; ++j) {
    if (!(graph.task_quality_mass(j) > 0.0)) continue;
    for (NodeId v = 0; v < graph.node_count(); ++v)
      weights[std::size_t(v)] = graph.node_quality(j, v);
    samplers[std::size_t(j)].emplace(weights);
    any = true;
  }
  if (!any)
    throw std::domain_error(
        "every task has zero quality mass; the diffusion value is identically 0");
  return samplers;
}

}  // namespace

RrSet sample_rr_set(const TaskGraph& graph, Rng& rng) {
  const auto samplers = build_root_samplers(graph);
  ReverseScratch scratch;
  scratch.resize(std::size_t(graph.node_count()));
  return scratch.sample(graph, samplers, rng);
}

RrCollection::RrCollection(const TaskGraph& graph, std::uint64_t seed,
                           std::uint64_t stream_tag)
    : graph_(&graph), seed_(seed), stream_tag_(stream_tag) {
  member_of_.resize(std::size_t(graph.node_count()));
  task_mass_.resize(std::size_t(graph.task_count()));
  for (TaskId j = 0; j < graph.task_count(); ++j)
    task_mass_[std::size_t(j)] = graph.task_quality_mass(j);
  max_mass_ = graph.max_quality_mass();
  root_samplers_ = build_root_samplers(graph);
}

void RrCollection::append_set(RrSet set) {
  const auto index = std::uint32_t(sets_.size());
  for (NodeId v : set.nodes) member_of_[std::size_t(v)].push_back(index);
  sets_.push_back(std::move(set));
}

void RrCollection::extend(std::size_t target, int threads) {
  if (target < sets_.size())
    throw std::invalid_argument("cannot shrink a reverse-set collection");
  const std::size_t begin = sets_.size();
  const std::size_t count = target - begin;
  if (count == 0) return;

  std::vector<RrSet> fresh(count);
  auto worker = [&](std::size_t lo, std::size_t hi) {
    ReverseScratch scratch;
    scratch.resize(std::size_t(graph_->node_count()));
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng = Rng::substream(seed_, kRrStream, stream_tag_, begin + i);
      fresh[i] = scratch.sample(*graph_, root_samplers_, rng);
    }
  };
  if (threads <= 1 || count < 512) {
    worker(0, count);
  } else {
    const int t = int(std::min<std::size_t>(std::size_t(threads), count));
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(t));
    for (int i = 0; i < t; ++i)
      pool.emplace_back(worker, count * std::size_t(i) / std::size_t(t),
                        count * std::size_t(i + 1) / std::size_t(t));
    for (auto& th : pool) th.join();
  }
  for (auto& set : fresh) append_set(std::move(set));
}

double RrCollection::estimate(std::span<const std::int32_t> seed_bidders,
                              const BidderProfile& bidders) const {
  if (sets_.empty()) throw std::domain_error("estimate over an empty collection");

  // claimed_at[v] = union of claim masks of selected bidders sitting at v.
  std::vector<std::uint32_t> claimed_at(std::size_t(graph_->node_count()), 0);
  for (std::int32_t b : seed_bidders)
    claimed_at[std::size_t(bidders.users[std::size_t(b)])] |=
        bidders.claims[std::size_t(b)];

  double covered = 0.0;
  for (const RrSet& set : sets_) {
    const std::uint32_t bit = 1u << set.task;
    for (NodeId v : set.nodes) {
      if (claimed_at[std::size_t(v)] & bit) {
        covered += task_mass_[std::size_t(set.task)];
        break;
      }
    }
  }
  return covered / double(sets_.size());
}

bool RrCollection::same_sets(const RrCollection& other) const {
  if (sets_.size() != other.sets_.size()) return false;
  for (std::size_t x = 0; x < sets_.size(); ++x) {
    const RrSet& a = sets_[x];
    const RrSet& b = other.sets_[x];
    if (a.task != b.task || a.root != b.root || a.nodes != b.nodes) return false;
  }
  return true;
}

void RrCollection::dump(std::ostream& out) const {
  write_u64(out, sets_.size());
  write_u32(out, std::uint32_t(task_mass_.size()));
  for (const RrSet& set : sets_) {
    write_u32(out, std::uint32_t(set.task));
    write_u32(out, std::uint32_t(set.root));
    write_u32(out, std::uint32_t(set.nodes.size()));
    for (NodeId v : set.nodes) write_u32(out, std::uint32_t(v));
  }
}

RrCollection RrCollection::load(std::istream& in, const TaskGraph& graph) {
  RrCollection rr(graph, 0, 0);
  const std::uint64_t count = read_u64(in);
  const std::uint32_t n_tasks = read_u32(in);
  if (n_tasks != std::uint32_t(graph.task_count()))
    throw std::runtime_error("reverse-set dump task count mismatch");
  for (std::uint64_t x = 0; x < count; ++x) {
    RrSet set;
    set.task = TaskId(read_u32(in));
    set.root = NodeId(read_u32(in));
    if (set.task < 0 || set.task >= graph.task_count())
      throw std::runtime_error("reverse-set dump has invalid task index");
    const std::uint32_t n_nodes = read_u32(in);
    set.nodes.resize(n_nodes);
    for (auto& v : set.nodes) {
      v = NodeId(read_u32(in));
      if (v < 0 || v >= graph.node_count())
        throw std::runtime_error("reverse-set dump has invalid node id");
    }
    if (set.nodes.empty() || set.nodes.front() != set.root)
      throw std::runtime_error("reverse-set dump set does not start at its root");
    rr.append_set(std::move(set));
  }
  return rr;
}

CoverageState::CoverageState(const RrCollection& collection,
                             const BidderProfile& bidders)
    : rr_(&collection),
      bidders_(&bidders),
      theta_(collection.size()),
      n_tasks_(collection.task_count()) {
  if (theta_ == 0)
    throw std::domain_error("coverage state over an empty collection");
  node_to_bidder_ = bidders.node_to_bidder(collection.graph().node_count());
  covered_.assign(theta_, 0);
  uncovered_counts_.assign(bidders.size() * std::size_t(n_tasks_), 0);
  in_set_.assign(bidders.size(), 0);

  for (std::size_t x = 0; x < theta_; ++x) {
    const RrSet& set = collection.set(x);
    for (NodeId v : set.nodes) {
      const std::int32_t b = node_to_bidder_[std::size_t(v)];
      if (b >= 0 && bidders.claims_task(std::size_t(b), set.task))
        uncovered_counts_[std::size_t(b) * std::size_t(n_tasks_) +
                          std::size_t(set.task)]++;
    }
  }
}

double CoverageState::gain(std::size_t bidder) const {
  ++gain_queries_;
  double mass = 0.0;
  const std::int32_t* counts =
      uncovered_counts_.data() + bidder * std::size_t(n_tasks_);
  for (std::int32_t j = 0; j < n_tasks_; ++j)
    if (counts[j] > 0) mass += double(counts[j]) * rr_->task_mass(j);
  return mass / double(theta_);
}

double CoverageState::top_gain_sum(std::size_t k) const {
  if (k == 0) return 0.0;
  std::vector<double> gains(bidders_->size());
  for (std::size_t b = 0; b < bidders_->size(); ++b) gains[b] = gain(b);
  k = std::min(k, gains.size());
  std::nth_element(gains.begin(), gains.begin() + std::ptrdiff_t(k - 1),
                   gains.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += gains[i];
  return sum;
}

void CoverageState::add(std::size_t bidder) {
  if (rr_->size() != theta_)
    throw std::logic_error("coverage state is stale: collection grew after construction");
  if (in_set_[bidder]) throw std::logic_error("bidder already selected");
  in_set_[bidder] = 1;
  selected_.push_back(std::int32_t(bidder));

  const NodeId node = bidders_->users[bidder];
  for (std::uint32_t x : rr_->sets_containing(node)) {
    const RrSet& set = rr_->set(x);
    if (covered_[x] || !bidders_->claims_task(bidder, set.task)) continue;
    covered_[x] = 1;
    covered_mass_ += rr_->task_mass(set.task);
    for (NodeId v : set.nodes) {
      const std::int32_t b = node_to_bidder_[std::size_t(v)];
      if (b >= 0 && bidders_->claims_task(std::size_t(b), set.task))
        uncovered_counts_[std::size_t(b) * std::size_t(n_tasks_) +
                          std::size_t(set.task)]--;
    }
  }
}

}  // namespace crowdcast
