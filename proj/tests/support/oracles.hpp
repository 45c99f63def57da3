#pragma once

// Test-only oracles: brute-force searches, high-precision re-evaluations and
// small random instances. Everything here follows an independent computation
// path from the library code it checks.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crowdcast/auction.hpp"
#include "crowdcast/coverage.hpp"
#include "crowdcast/diffusion.hpp"
#include "crowdcast/graph.hpp"
#include "crowdcast/harness.hpp"
#include "crowdcast/sampling.hpp"

namespace crowdcast::testing {

// --------------------------------------------------------------------------
// Coverage oracle: evaluates the estimator for arbitrary bidder subsets with
// plain per-bidder bitsets (no incremental bookkeeping).
// --------------------------------------------------------------------------
class CoverageOracle {
 public:
  CoverageOracle(const RrCollection& collection, const BidderProfile& bidders);

  double value_of_mask(std::uint64_t bidder_mask) const;
  double value_of(std::span<const std::int32_t> set) const;

  /// Best estimator value over all subsets of size <= k (bidders <= 63).
  double best_cardinality(std::int32_t k,
                          std::uint64_t* best_mask = nullptr) const;

  /// Best estimator value over all subsets with total bid <= budget.
  double best_knapsack(double budget, std::uint64_t* best_mask = nullptr) const;

 private:
  std::size_t theta_;
  std::size_t words_;
  std::size_t n_;
  std::vector<std::uint64_t> bits_;  // [bidder * words_ + word]
  std::vector<double> set_weight_;
  std::vector<double> bids_;
};

/// Best exact diffusion value over every budget-feasible bidder subset.
double best_exact_knapsack(const TaskGraph& graph, const BidderProfile& bidders,
                           double budget, int max_free_edges = 25,
                           std::uint64_t* best_mask = nullptr);

// --------------------------------------------------------------------------
// Auction oracles
// --------------------------------------------------------------------------

/// Winner selection by the same greedy rule but with every marginal gain
/// recomputed from scratch through RrCollection::estimate.
std::vector<std::int32_t> reference_select_winners(const RrCollection& collection,
                                                   const BidderProfile& bidders,
                                                   double budget);

/// Supremum bid at which the bidder still wins, by bisection over reruns of
/// select_winners. Returns 0 when it never wins on the grid floor.
double critical_bid_by_search(const RrCollection& collection,
                              const BidderProfile& bidders, double budget,
                              std::int32_t bidder, double hi, double tol = 1e-7);

// --------------------------------------------------------------------------
// High-precision re-evaluations (100-decimal-digit arithmetic)
// --------------------------------------------------------------------------

/// Lower confidence bound on the normalized scale, from the coverage count
/// (estimator value times collection size).
double hp_lower_bound(double count, std::size_t theta, double delta);
double hp_upper_bound(double count, std::size_t theta, double delta);

/// Worst-case collection size, including an exact big-integer binomial.
double hp_theta_max(std::int32_t n, std::int32_t k, double epsilon, double delta);

/// ln C(n, k) through an exact big-integer binomial.
double ln_binomial_bigint(std::int32_t n, std::int32_t k);

/// Upper-tail p-value of a chi-squared statistic.
double chi_squared_pvalue(double statistic, int dof);

// --------------------------------------------------------------------------
// Random desk-scale instances
// --------------------------------------------------------------------------

struct InstanceSpec {
  std::int32_t nodes = 8;
  std::int32_t edges = 10;
  std::int32_t tasks = 2;
  std::int32_t users = 6;
  double weight_lo = 0.1;
  double weight_hi = 0.6;
  /// When nonempty, each (task, edge) weight is drawn from this set instead
  /// of the uniform range (e.g. {0.0, 0.5, 1.0} for enumerable layers).
  std::vector<double> weight_choices;
  double area_side = 100.0;
  double block_side = 50.0;
  double quality_lo = 0.05;
  double quality_hi = 1.0;
};

struct TestInstance {
  TaskGraph graph;
  BidderProfile bidders;
  PrivateCosts costs;
};

/// Random instance with per-(task, edge) weights, nonuniform qualities, and
/// the standard bid model (claimed count times a unit bid in [0.8, 1.2]).
/// Every task is claimed by someone and every bidder claims something.
TestInstance random_instance(const InstanceSpec& spec, std::uint64_t seed);

}  // namespace crowdcast::testing
