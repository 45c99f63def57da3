#include "support/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "crowdcast/generators.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast::testing {

using big_float = boost::multiprecision::cpp_bin_float_100;
using big_int = boost::multiprecision::cpp_int;

// --------------------------------------------------------------------------
// CoverageOracle
// --------------------------------------------------------------------------

CoverageOracle::CoverageOracle(const RrCollection& collection,
                               const BidderProfile& bidders)
    : theta_(collection.size()),
      words_((theta_ + 63) / 64),
      n_(bidders.size()),
      bids_(bidders.bids) {
  if (n_ > 63) throw std::invalid_argument("coverage oracle supports <= 63 bidders");
  bits_.assign(n_ * words_, 0);
  set_weight_.resize(theta_);
  const auto node_map = bidders.node_to_bidder(collection.graph().node_count());
  for (std::size_t x = 0; x < theta_; ++x) {
    const RrSet& set = collection.set(x);
    set_weight_[x] = collection.set_weight(x);
    for (NodeId v : set.nodes) {
      const std::int32_t b = node_map[std::size_t(v)];
      if (b >= 0 && bidders.claims_task(std::size_t(b), set.task))
        bits_[std::size_t(b) * words_ + x / 64] |= 1ull << (x % 64);
    }
  }
}

double CoverageOracle::value_of_mask(std::uint64_t bidder_mask) const {
  double covered = 0.0;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < n_; ++b)
      if ((bidder_mask >> b) & 1ull) word |= bits_[b * words_ + w];
    while (word) {
      const int bit = std::countr_zero(word);
      covered += set_weight_[w * 64 + std::size_t(bit)];
      word &= word - 1;
    }
  }
  return covered / double(theta_);
}

double CoverageOracle::value_of(std::span<const std::int32_t> set) const {
  std::uint64_t mask = 0;
  for (std::int32_t b : set) mask |= 1ull << b;
  return value_of_mask(mask);
}

double CoverageOracle::best_cardinality(std::int32_t k,
                                        std::uint64_t* best_mask) const {
  double best = 0.0;
  std::uint64_t arg = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n_); ++mask) {
    if (std::popcount(mask) > k) continue;
    const double v = value_of_mask(mask);
    if (v > best) {
      best = v;
      arg = mask;
    }
  }
  if (best_mask) *best_mask = arg;
  return best;
}

double CoverageOracle::best_knapsack(double budget,
                                     std::uint64_t* best_mask) const {
  double best = 0.0;
  std::uint64_t arg = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n_); ++mask) {
    double spend = 0.0;
    for (std::size_t b = 0; b < n_; ++b)
      if ((mask >> b) & 1ull) spend += bids_[b];
    if (spend > budget) continue;
    const double v = value_of_mask(mask);
    if (v > best) {
      best = v;
      arg = mask;
    }
  }
  if (best_mask) *best_mask = arg;
  return best;
}

double best_exact_knapsack(const TaskGraph& graph, const BidderProfile& bidders,
                           double budget, int max_free_edges,
                           std::uint64_t* best_mask) {
  const std::size_t n = bidders.size();
  if (n > 20) throw std::invalid_argument("exact knapsack oracle supports <= 20 bidders");
  double best = 0.0;
  std::uint64_t arg = 0;
  std::vector<std::int32_t> set;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double spend = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      if ((mask >> b) & 1ull) spend += bidders.bids[b];
    if (spend > budget) continue;
    set.clear();
    for (std::size_t b = 0; b < n; ++b)
      if ((mask >> b) & 1ull) set.push_back(std::int32_t(b));
    const double v = exact_value(graph, set, bidders, max_free_edges);
    if (v > best) {
      best = v;
      arg = mask;
    }
  }
  if (best_mask) *best_mask = arg;
  return best;
}

// --------------------------------------------------------------------------
// Auction oracles
// --------------------------------------------------------------------------

std::vector<std::int32_t> reference_select_winners(const RrCollection& collection,
                                                   const BidderProfile& bidders,
                                                   double budget) {
  std::vector<std::int32_t> winners;
  std::vector<char> taken(bidders.size(), 0);
  double spent = 0.0;
  double current = 0.0;
  std::vector<std::int32_t> trial;
  while (true) {
    std::int32_t best = -1;
    double best_ratio = 0.0;
    for (std::size_t b = 0; b < bidders.size(); ++b) {
      if (taken[b]) continue;
      trial = winners;
      trial.push_back(std::int32_t(b));
      const double gain = collection.estimate(trial, bidders) - current;
      if (gain <= 0.0) continue;
      const double ratio = gain / bidders.bids[b];
      if (ratio > best_ratio ||
          (ratio == best_ratio && best >= 0 &&
           bidders.users[b] < bidders.users[std::size_t(best)])) {
        best = std::int32_t(b);
        best_ratio = ratio;
      }
    }
    if (best < 0) break;
    if (spent + bidders.bids[std::size_t(best)] > budget) break;
    winners.push_back(best);
    taken[std::size_t(best)] = 1;
    spent += bidders.bids[std::size_t(best)];
    current = collection.estimate(winners, bidders);
  }
  return winners;
}

double critical_bid_by_search(const RrCollection& collection,
                              const BidderProfile& bidders, double budget,
                              std::int32_t bidder, double hi, double tol) {
  BidderProfile profile = bidders;
  auto wins = [&](double bid) {
    profile.bids[std::size_t(bidder)] = bid;
    const auto winners = select_winners(collection, profile, budget);
    return std::find(winners.begin(), winners.end(), bidder) != winners.end();
  };
  double lo = tol;
  if (!wins(lo)) return 0.0;
  if (wins(hi)) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (wins(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// --------------------------------------------------------------------------
// High-precision evaluations
// --------------------------------------------------------------------------

double hp_lower_bound(double count, std::size_t theta, double delta) {
  const big_float eta = log(big_float(1) / big_float(delta));
  const big_float root =
      sqrt(big_float(count) + 2 * eta / 9) - sqrt(eta / 2);
  const big_float value = (root * root - eta / 18) / big_float(theta);
  return value < 0 ? 0.0 : double(value);
}

double hp_upper_bound(double count, std::size_t theta, double delta) {
  const big_float eta = log(big_float(1) / big_float(delta));
  const big_float root = sqrt(big_float(count) + eta / 2) + sqrt(eta / 2);
  return double(root * root / big_float(theta));
}

double ln_binomial_bigint(std::int32_t n, std::int32_t k) {
  big_int binom = 1;
  for (std::int32_t i = 0; i < k; ++i) {
    binom *= n - i;
    binom /= i + 1;  // exact at every step: C(n, i+1) is integral
  }
  return double(log(big_float(binom)));
}

double hp_theta_max(std::int32_t n, std::int32_t k, double epsilon, double delta) {
  const big_float e_frac = 1 - 1 / exp(big_float(1));
  const big_float log_term = log(6 / big_float(delta));
  big_int binom = 1;
  for (std::int32_t i = 0; i < k; ++i) {
    binom *= n - i;
    binom /= i + 1;
  }
  const big_float root =
      e_frac * sqrt(log_term) + sqrt(e_frac * (log(big_float(binom)) + log_term));
  return double(2 * root * root /
                (big_float(epsilon) * big_float(epsilon) * big_float(k)));
}

double chi_squared_pvalue(double statistic, int dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// --------------------------------------------------------------------------
// Random instances
// --------------------------------------------------------------------------

TestInstance random_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.users > spec.nodes)
    throw std::invalid_argument("more users than nodes");

  GraphSkeleton skeleton = uniform_random_graph(spec.nodes, spec.edges,
                                                hash_streams(seed, 0x696e73, 1));

  Rng rng = Rng::substream(seed, 0x696e73 /* "ins" */, 2);
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(spec.tasks));
  for (auto& row : weights) {
    row.resize(std::size_t(spec.edges));
    for (double& w : row)
      w = spec.weight_choices.empty()
              ? rng.uniform(spec.weight_lo, spec.weight_hi)
              : spec.weight_choices[std::size_t(
                    rng.below(spec.weight_choices.size()))];
  }

  LocationMap grid(spec.area_side, spec.block_side);
  std::vector<double> xs(static_cast<std::size_t>(spec.nodes));
  std::vector<double> ys(static_cast<std::size_t>(spec.nodes));
  for (std::int32_t v = 0; v < spec.nodes; ++v) {
    xs[std::size_t(v)] = rng.uniform(0.0, spec.area_side);
    ys[std::size_t(v)] = rng.uniform(0.0, spec.area_side);
  }
  std::vector<std::vector<double>> quality(static_cast<std::size_t>(spec.tasks));
  for (auto& row : quality) {
    row.resize(std::size_t(grid.subarea_count()));
    for (double& q : row) q = rng.uniform(spec.quality_lo, spec.quality_hi);
  }
  TaskGraph graph(std::move(skeleton), std::move(weights), std::move(xs),
                  std::move(ys), grid, std::move(quality));

  // Users: first `users` slots of a partial shuffle, sorted.
  std::vector<NodeId> pool(static_cast<std::size_t>(spec.nodes));
  for (std::int32_t v = 0; v < spec.nodes; ++v) pool[std::size_t(v)] = v;
  for (std::int32_t i = 0; i < spec.users; ++i) {
    const auto j = std::size_t(i) + std::size_t(rng.below(
                       std::uint64_t(spec.nodes - i)));
    std::swap(pool[std::size_t(i)], pool[j]);
  }
  std::vector<NodeId> users(pool.begin(), pool.begin() + spec.users);
  std::sort(users.begin(), users.end());

  const std::uint32_t all_tasks = (1u << spec.tasks) - 1u;
  std::vector<std::uint32_t> claims(static_cast<std::size_t>(spec.users));
  while (true) {
    std::uint32_t seen = 0;
    for (auto& mask : claims) {
      do {
        mask = 0;
        for (std::int32_t j = 0; j < spec.tasks; ++j)
          if (rng.bernoulli(0.5)) mask |= 1u << j;
      } while (mask == 0);
      seen |= mask;
    }
    if (seen == all_tasks) break;
  }

  std::vector<double> bids(static_cast<std::size_t>(spec.users));
  for (std::size_t i = 0; i < bids.size(); ++i)
    bids[i] = double(__builtin_popcount(claims[i])) * rng.uniform(0.8, 1.2);

  TestInstance instance{std::move(graph),
                        BidderProfile{std::move(users), std::move(claims), bids},
                        PrivateCosts{bids}};
  instance.bidders.validate(instance.graph.node_count(), spec.tasks);
  return instance;
}

}  // namespace crowdcast::testing
