#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdcast/bidders.hpp"
#include "crowdcast/sampling.hpp"

namespace crowdcast {

/// How a winner's payment is derived from the greedy replay without it.
enum class PaymentRule {
  /// Every replacement-bid candidate is capped by the budget remaining at its
  /// position, and the end-of-candidates remainder term applies only while
  /// the winner still has positive residual gain. The payment then equals the
  /// supremum of the bids at which the winner keeps winning, which is what
  /// makes truthful bidding dominant. Default.
  budget_capped,
  /// Uncapped candidates with the replay cut off once the accumulated rival
  /// bids plus the winner's own bid overflow the budget. Can exceed the
  /// critical bid for winners that dominate late replay positions; kept for
  /// comparison experiments.
  greedy_threshold,
};

struct PaymentTrace {
  double best_candidate = 0.0;   ///< largest replacement-bid term
  double remainder_term = 0.0;   ///< budget left when candidates ran out (0 if unused)
  std::int32_t steps = 0;        ///< replay picks examined
  bool exhausted_candidates = false;  ///< replay ran out of positive gains
};

/// Greedy winner selection: repeatedly take the positive-gain bidder with the
/// best marginal-gain-per-bid ratio (ties to the lowest user id) and stop at
/// the first pick whose bid overflows the remaining budget. Returns bidder
/// indices in selection order; empty when nothing affordable helps.
std::vector<std::int32_t> select_winners(const RrCollection& collection,
                                         const BidderProfile& bidders,
                                         double budget);

/// Payment for one winner: replays the selection greedy over all rivals and
/// takes the best bid the winner could have placed and still displaced one of
/// them (or fit in the leftover budget once rivals run out).
double critical_payment(const RrCollection& collection,
                        const BidderProfile& bidders, double budget,
                        std::int32_t winner,
                        PaymentRule rule = PaymentRule::budget_capped,
                        PaymentTrace* trace = nullptr);

struct AuctionOutcome {
  std::vector<std::int32_t> winners;  ///< selection order
  std::vector<double> payments;       ///< aligned with winners
  std::vector<PaymentTrace> traces;
  double bid_total = 0.0;
  double payment_total = 0.0;
  double overpayment_ratio = 0.0;  ///< NaN when there are no winners
};

/// Winner selection plus payments. Enforces that every payment covers the
/// winner's bid (individual rationality) and that winners' bids fit the
/// budget; both hold by construction and are checked defensively.
AuctionOutcome run_auction(const RrCollection& collection,
                           const BidderProfile& bidders, double budget,
                           PaymentRule rule = PaymentRule::budget_capped);

struct SweepPoint {
  double bid = 0.0;
  bool won = false;
  double payment = 0.0;  ///< 0 when losing
  double utility = 0.0;  ///< payment - private cost when winning, else 0
};

/// Utility curve of one bidder across a bid grid: the full auction reruns at
/// each grid bid with everyone else fixed. The collection is fixed, so the
/// sweep is deterministic.
std::vector<SweepPoint> bid_sweep(const RrCollection& collection,
                                  const BidderProfile& bidders, double budget,
                                  std::int32_t bidder, double private_cost,
                                  std::span<const double> bid_grid,
                                  PaymentRule rule = PaymentRule::budget_capped);

}  // namespace crowdcast
