#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdcast/bidders.hpp"
#include "crowdcast/sampling.hpp"

namespace crowdcast {

/// Largest k such that the k cheapest bids fit the budget. Converts the
/// knapsack constraint into a cardinality bound: no feasible set has more
/// members. Throws std::runtime_error when even the cheapest bid overflows.
std::int32_t compute_cardinality_bound(std::span<const double> bids,
                                       double budget);

/// ln C(n, k) via log-gamma.
double log_binomial(std::int32_t n, std::int32_t k);

/// Record of one cardinality-greedy run: the picks, their marginal gains and,
/// per prefix length a = 0..k, the prefix estimator value together with the
/// sum of the k largest marginals against that prefix. The latter pair yields
/// the adaptive upper estimate used by the stopping rule.
struct GreedyTrace {
  std::vector<std::int32_t> picks;
  std::vector<double> pick_gains;
  std::vector<double> prefix_values;  // size picks.size() + 1
  std::vector<double> topk_sums;      // size picks.size() + 1

  double value() const { return prefix_values.back(); }

  /// min over prefixes of (prefix value + top-k marginal sum); an upper bound
  /// on the estimator value of the best size-k set on this collection.
  double upper_estimate() const;
};

/// Greedy weighted max coverage under a cardinality bound; ties broken by
/// lowest user id. Stops early when no candidate has positive gain.
GreedyTrace max_coverage_greedy(const RrCollection& collection,
                                const BidderProfile& bidders, std::int32_t k);

/// Greedy gain-per-bid coverage under a budget: picks the best ratio among
/// positive-gain candidates and stops at the first pick that would overflow
/// the remaining budget. When compare_best_singleton is set the result is the
/// better (by estimator value) of the greedy set and the best affordable
/// single bidder.
std::vector<std::int32_t> budgeted_coverage_greedy(
    const RrCollection& collection, const BidderProfile& bidders, double budget,
    bool compare_best_singleton = true);

/// One-sided confidence bounds for the coverage estimator, evaluated on the
/// normalized scale (per-sample values in [0,1]) and rescaled by `scale`
/// (the largest task quality mass). `value` is the estimator value of the
/// candidate set, in quality units.
double coverage_lower_bound(double value, std::size_t theta, double delta,
                            double scale);
/// As above, but `value` is the adaptive upper estimate of the optimum.
double coverage_upper_bound(double value, std::size_t theta, double delta,
                            double scale);

/// The doubling sample schedule: theta_max from the union-bound worst case,
/// a starting size theta_max * epsilon^2 * k (floored at 32), and doubling
/// until theta_max with per-round failure budget delta / (3 * rounds).
struct SampleSchedule {
  double epsilon = 0.0;
  double delta = 0.0;
  double theta_max = 0.0;     // real-valued worst-case size
  std::size_t theta0 = 0;     // first-round size
  std::int32_t rounds = 0;    // doubling rounds (>= 1)
  double delta_round = 0.0;   // per-round, per-side failure probability

  static SampleSchedule plan(std::int32_t n_bidders, std::int32_t k,
                             double epsilon, double delta);

  /// Collection size at 0-based round r: theta0 * 2^r, capped at theta_max.
  std::size_t theta_at(std::int32_t round) const;
};

struct SamplingRound {
  std::int32_t round = 0;
  std::size_t theta = 0;
  double f_hat = 0.0;
  double f_low = 0.0;
  double f_up = 0.0;
  double ratio = 0.0;
  double millis = 0.0;
};

struct SamplingResult {
  RrCollection primary;      ///< the collection the caller should keep using
  RrCollection validation;   ///< the paired collection behind the lower bound
  GreedyTrace last_greedy;
  SampleSchedule schedule;
  std::vector<SamplingRound> rounds;
  bool reached_target = false;  ///< stopped on ratio >= 1 - 1/e - epsilon
};

/// Grows paired collections by doubling until the greedy size-k solution is
/// certified within (1 - 1/e - epsilon) of the size-k optimum, or the
/// schedule is exhausted. Deterministic given the seed.
SamplingResult modified_opimc(const TaskGraph& graph,
                              const BidderProfile& bidders, std::int32_t k,
                              double epsilon, double delta, std::uint64_t seed,
                              int threads = 1);

}  // namespace crowdcast
