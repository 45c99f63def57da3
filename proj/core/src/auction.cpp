#include "crowdcast/auction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdcast {

namespace {

constexpr double kIrSlack = 1e-9;

/// Best positive-gain unselected bidder by gain/bid, ties to lowest user id;
/// `skip` excludes one bidder (the winner being priced). Returns -1 when all
/// remaining gains are zero.
std::int32_t best_ratio_rival(const CoverageState& state,
                              const BidderProfile& bidders, std::int32_t skip) {
  std::int32_t best = -1;
  double best_ratio = 0.0;
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    if (std::int32_t(b) == skip || state.is_selected(b)) continue;
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

}  // namespace

std::vector<std::int32_t> select_winners(const RrCollection& collection,
                                         const BidderProfile& bidders,
                                         double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  CoverageState state(collection, bidders);
  std::vector<std::int32_t> winners;
  double spent = 0.0;
  while (true) {
    const std::int32_t pick = best_ratio_rival(state, bidders, -1);
    if (pick < 0) break;
    if (spent + bidders.bids[std::size_t(pick)] > budget) break;
    winners.push_back(pick);
    spent += bidders.bids[std::size_t(pick)];
    state.add(std::size_t(pick));
  }
  return winners;
}

double critical_payment(const RrCollection& collection,
                        const BidderProfile& bidders, double budget,
                        std::int32_t winner, PaymentRule rule,
                        PaymentTrace* trace) {
  if (winner < 0 || std::size_t(winner) >= bidders.size())
    throw std::out_of_range("winner index out of range");

  CoverageState state(collection, bidders);
  double payment = 0.0;
  double best_candidate = 0.0;
  double remainder_term = 0.0;
  double spent = 0.0;
  std::int32_t steps = 0;
  bool exhausted = false;

  while (true) {
    const double own_gain = state.gain(std::size_t(winner));
    if (own_gain <= 0.0) break;  // gains never recover; no further term matters

    const std::int32_t rival = best_ratio_rival(state, bidders, winner);
    if (rival < 0) {
      // Rivals ran out of coverage to add: any bid fitting the leftover
      // budget wins the next slot outright.
      if (rule == PaymentRule::budget_capped ||
          spent + bidders.bids[std::size_t(winner)] <= budget) {
        remainder_term = budget - spent;
        payment = std::max(payment, remainder_term);
      }
      exhausted = true;
      break;
    }

    ++steps;
    const double rival_gain = state.gain(std::size_t(rival));
    const double rival_bid = bidders.bids[std::size_t(rival)];
    double candidate = rival_bid * own_gain / rival_gain;
    if (rule == PaymentRule::budget_capped)
      candidate = std::min(candidate, budget - spent);
    if (candidate > best_candidate) {
      best_candidate = candidate;
      payment = std::max(payment, candidate);
    }

    if (rule == PaymentRule::budget_capped) {
      // The replay ends where the rival itself no longer fits; past that
      // point no position is reachable at any bid.
      if (spent + rival_bid > budget) break;
      state.add(std::size_t(rival));
      spent += rival_bid;
      // Remaining candidates and the remainder term are capped by the
      // leftover budget, so they cannot raise the maximum any further.
      if (budget - spent <= payment) break;
    } else {
      state.add(std::size_t(rival));
      spent += rival_bid;
      if (spent + bidders.bids[std::size_t(winner)] > budget) break;
    }
  }

  if (trace) {
    trace->best_candidate = best_candidate;
    trace->remainder_term = remainder_term;
    trace->steps = steps;
    trace->exhausted_candidates = exhausted;
  }
  return payment;
}

AuctionOutcome run_auction(const RrCollection& collection,
                           const BidderProfile& bidders, double budget,
                           PaymentRule rule) {
  AuctionOutcome outcome;
  outcome.winners = select_winners(collection, bidders, budget);
  outcome.payments.reserve(outcome.winners.size());
  outcome.traces.reserve(outcome.winners.size());

  for (std::int32_t w : outcome.winners) {
    PaymentTrace trace;
    const double p = critical_payment(collection, bidders, budget, w, rule, &trace);
    const double bid = bidders.bids[std::size_t(w)];
    if (p + kIrSlack < bid)
      throw std::logic_error("payment below a winner's bid; selection and "
                             "pricing disagree");
    outcome.payments.push_back(p);
    outcome.traces.push_back(trace);
    outcome.bid_total += bid;
    outcome.payment_total += p;
  }

  if (outcome.bid_total > budget + kIrSlack)
    throw std::logic_error("selected bids overflow the budget");

  outcome.overpayment_ratio =
      outcome.winners.empty()
          ? std::numeric_limits<double>::quiet_NaN()
          : (outcome.payment_total - outcome.bid_total) / outcome.bid_total;
  return outcome;
}

std::vector<SweepPoint> bid_sweep(const RrCollection& collection,
                                  const BidderProfile& bidders, double budget,
                                  std::int32_t bidder, double private_cost,
                                  std::span<const double> bid_grid,
                                  PaymentRule rule) {
  if (bidder < 0 || std::size_t(bidder) >= bidders.size())
    throw std::out_of_range("bidder index out of range");

  BidderProfile scenario = bidders;
  std::vector<SweepPoint> curve;
  curve.reserve(bid_grid.size());
  for (double bid : bid_grid) {
    if (!(bid > 0.0)) throw std::invalid_argument("grid bids must be positive");
    scenario.bids[std::size_t(bidder)] = bid;
    const auto winners = select_winners(collection, scenario, budget);
    SweepPoint point;
    point.bid = bid;
    point.won = std::find(winners.begin(), winners.end(), bidder) != winners.end();
    if (point.won) {
      point.payment = critical_payment(collection, scenario, budget, bidder, rule);
      point.utility = point.payment - private_cost;
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace crowdcast
