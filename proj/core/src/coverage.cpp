#include "crowdcast/coverage.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace crowdcast {

namespace {

constexpr std::uint64_t kPrimaryTag = 1;
constexpr std::uint64_t kValidationTag = 2;

/// Best positive-gain candidate by gain/bid ratio, ties to the lowest user id.
/// Returns -1 when every unselected bidder has zero gain.
std::int32_t best_ratio_candidate(const CoverageState& state,
                                  const BidderProfile& bidders) {
  std::int32_t best = -1;
  double best_ratio = 0.0;
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    if (state.is_selected(b)) continue;
    const double g = state.gain(b);
    if (g <= 0.0) continue;
    const double ratio = g / bidders.bids[b];
    if (ratio > best_ratio ||
        (ratio == best_ratio && best >= 0 &&
         bidders.users[b] < bidders.users[std::size_t(best)])) {
      best = std::int32_t(b);
      best_ratio = ratio;
    }
  }
  return best;
}

std::int32_t best_gain_candidate(const CoverageState& state,
                                 const BidderProfile& bidders) {
  std::int32_t best = -1;
  double best_gain = 0.0;
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    if (state.is_selected(b)) continue;
    const double g = state.gain(b);
    if (g <= 0.0) continue;
    if (g > best_gain ||
        (g == best_gain && best >= 0 &&
         bidders.users[b] < bidders.users[std::size_t(best)])) {
      best = std::int32_t(b);
      best_gain = g;
    }
  }
  return best;
}

}  // namespace

std::int32_t compute_cardinality_bound(std::span<const double> bids,
                                       double budget) {
  if (bids.empty()) throw std::invalid_argument("no bids");
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  std::vector<double> sorted(bids.begin(), bids.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() > budget)
    throw std::runtime_error("infeasible: the cheapest bid exceeds the budget");
  std::int32_t k = 0;
  double sum = 0.0;
  for (double b : sorted) {
    sum += b;
    if (sum > budget) break;
    ++k;
  }
  return k;
}

double log_binomial(std::int32_t n, std::int32_t k) {
  if (k < 0 || n < 0 || k > n) throw std::invalid_argument("need 0 <= k <= n");
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

double GreedyTrace::upper_estimate() const {
  double best = prefix_values[0] + topk_sums[0];
  for (std::size_t a = 1; a < prefix_values.size(); ++a)
    best = std::min(best, prefix_values[a] + topk_sums[a]);
  return best;
}

GreedyTrace max_coverage_greedy(const RrCollection& collection,
                                const BidderProfile& bidders, std::int32_t k) {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  if (std::size_t(k) > bidders.size())
    throw std::invalid_argument("k exceeds the number of bidders");

  CoverageState state(collection, bidders);
  GreedyTrace trace;
  trace.prefix_values.push_back(state.covered_value());
  trace.topk_sums.push_back(state.top_gain_sum(std::size_t(k)));

  for (std::int32_t a = 0; a < k; ++a) {
    const std::int32_t pick = best_gain_candidate(state, bidders);
    if (pick < 0) break;  // every remaining gain is zero; value cannot grow
    trace.picks.push_back(pick);
    trace.pick_gains.push_back(state.gain(std::size_t(pick)));
    state.add(std::size_t(pick));
    trace.prefix_values.push_back(state.covered_value());
    trace.topk_sums.push_back(state.top_gain_sum(std::size_t(k)));
  }
  return trace;
}

std::vector<std::int32_t> budgeted_coverage_greedy(
    const RrCollection& collection, const BidderProfile& bidders, double budget,
    bool compare_best_singleton) {
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");

  bool any_affordable = false;
  for (double b : bidders.bids) any_affordable |= b <= budget;
  if (!any_affordable)
    throw std::runtime_error("infeasible: no bidder fits the budget");

  CoverageState state(collection, bidders);
  std::vector<std::int32_t> picks;
  double spent = 0.0;
  while (true) {
    const std::int32_t pick = best_ratio_candidate(state, bidders);
    if (pick < 0) break;
    if (spent + bidders.bids[std::size_t(pick)] > budget) break;
    picks.push_back(pick);
    spent += bidders.bids[std::size_t(pick)];
    state.add(std::size_t(pick));
  }

  if (compare_best_singleton) {
    std::int32_t best_single = -1;
    double best_value = -1.0;
    for (std::size_t b = 0; b < bidders.size(); ++b) {
      if (bidders.bids[b] > budget) continue;
      const std::int32_t one[] = {std::int32_t(b)};
      const double value = collection.estimate(one, bidders);
      if (value > best_value) {
        best_value = value;
        best_single = std::int32_t(b);
      }
    }
    if (best_single >= 0 && best_value > state.covered_value())
      return {best_single};
  }
  return picks;
}

double coverage_lower_bound(double value, std::size_t theta, double delta,
                            double scale) {
  if (theta == 0) throw std::invalid_argument("empty collection");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("bad delta");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  const double eta = std::log(1.0 / delta);
  const double count = (value / scale) * double(theta);
  const double root = std::sqrt(count + 2.0 * eta / 9.0) - std::sqrt(eta / 2.0);
  const double bounded = root * root - eta / 18.0;
  return bounded <= 0.0 ? 0.0 : (bounded / double(theta)) * scale;
}

double coverage_upper_bound(double value, std::size_t theta, double delta,
                            double scale) {
  if (theta == 0) throw std::invalid_argument("empty collection");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("bad delta");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  const double eta = std::log(1.0 / delta);
  const double count = (value / scale) * double(theta);
  const double root = std::sqrt(count + eta / 2.0) + std::sqrt(eta / 2.0);
  return (root * root / double(theta)) * scale;
}

SampleSchedule SampleSchedule::plan(std::int32_t n_bidders, std::int32_t k,
                                    double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");
  if (k < 1 || k > n_bidders) throw std::invalid_argument("need 1 <= k <= bidders");

  SampleSchedule s;
  s.epsilon = epsilon;
  s.delta = delta;

  const double e_frac = 1.0 - 1.0 / std::exp(1.0);
  const double log_term = std::log(6.0 / delta);
  const double root = e_frac * std::sqrt(log_term) +
                      std::sqrt(e_frac * (log_binomial(n_bidders, k) + log_term));
  s.theta_max = 2.0 * root * root / (epsilon * epsilon * double(k));

  const double theta0_real = s.theta_max * epsilon * epsilon * double(k);
  s.theta0 = std::max<std::size_t>(std::size_t(std::ceil(theta0_real)), 32);

  const double spread = s.theta_max / double(s.theta0);
  s.rounds = spread > 1.0
                 ? std::max<std::int32_t>(
                       1, std::int32_t(std::ceil(std::log2(spread))))
                 : 1;
  s.delta_round = delta / (3.0 * double(s.rounds));
  return s;
}

std::size_t SampleSchedule::theta_at(std::int32_t round) const {
  const std::size_t cap =
      std::max(theta0, std::size_t(std::ceil(theta_max)));
  std::size_t theta = theta0;
  for (std::int32_t r = 0; r < round; ++r) {
    if (theta >= cap) return cap;
    theta *= 2;
  }
  return std::min(theta, cap);
}

SamplingResult modified_opimc(const TaskGraph& graph,
                              const BidderProfile& bidders, std::int32_t k,
                              double epsilon, double delta, std::uint64_t seed,
                              int threads) {
  const SampleSchedule schedule =
      SampleSchedule::plan(std::int32_t(bidders.size()), k, epsilon, delta);
  const double target = 1.0 - 1.0 / std::exp(1.0) - epsilon;
  const double scale = graph.max_quality_mass();

  SamplingResult result{RrCollection(graph, seed, kPrimaryTag),
                        RrCollection(graph, seed, kValidationTag),
                        GreedyTrace{},
                        schedule,
                        {},
                        false};

  for (std::int32_t round = 0; round < schedule.rounds; ++round) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t theta = schedule.theta_at(round);
    result.primary.extend(theta, threads);
    result.validation.extend(theta, threads);

    result.last_greedy = max_coverage_greedy(result.primary, bidders, k);
    const double f_hat = result.last_greedy.value();
    const double f_hat_validation =
        result.validation.estimate(result.last_greedy.picks, bidders);
    const double f_low = coverage_lower_bound(
        f_hat_validation, result.validation.size(), schedule.delta_round, scale);
    const double f_up =
        coverage_upper_bound(result.last_greedy.upper_estimate(),
                             result.primary.size(), schedule.delta_round, scale);
    const double ratio = f_up > 0.0 ? f_low / f_up : 0.0;

    const double millis =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    result.rounds.push_back({round, theta, f_hat, f_low, f_up, ratio, millis});

    if (ratio >= target) {
      result.reached_target = true;
      break;
    }
  }
  return result;
}

}  // namespace crowdcast
