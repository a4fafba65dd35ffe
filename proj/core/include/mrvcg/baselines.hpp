#pragma once

#include <string>
#include <vector>

#include "mrvcg/datasets.hpp"
#include "mrvcg/join.hpp"
#include "mrvcg/types.hpp"

namespace mrvcg {

// Bid over units of one resource: values[u] is the worth of u units.
// Must start at 0, be strictly increasing, and have non-increasing marginal
// gains (checked with a small relative slack for rounding).
struct SingleResourceBid {
  std::string agent_id;
  std::vector<double> values;  // length units + 1
};

struct ConcaveAuctionResult {
  std::vector<int> units_won;
  std::vector<double> values;  // each bidder's value at units_won
  std::vector<double> payments;
  double social_welfare = 0.0;
};

// Greedy single-resource auction: repeatedly grant one unit to the bidder
// with the highest next marginal gain (ties keep the earliest bidder in the
// list; agent ids are unique, so list order decides). Concavity makes the
// greedy allocation welfare-optimal. Payments are exclusion compensation,
// each winner priced by rerunning the greedy pass without them.
ConcaveAuctionResult concave_auction(const std::vector<SingleResourceBid>& bids, int units);

// What selling each resource in its own auction loses against the combined
// solve. Every client splits its budget evenly, bidding max_value/R times
// its per-resource curve in each auction; the achieved welfare re-prices the
// separately-won bundles with the clients' true joint tensors.
struct SeparateAuctionsResult {
  double optimal_welfare = 0.0;
  double achieved_welfare = 0.0;
  double ratio = 0.0;  // achieved / optimal
  std::vector<Allocation> winnings;
};

SeparateAuctionsResult separate_auctions(const std::vector<GeneratedClient>& clients,
                                         const JoinOptions& options = {});

}  // namespace mrvcg
