#pragma once

#include <string>
#include <vector>

#include "mrvcg/join.hpp"
#include "mrvcg/types.hpp"

namespace mrvcg {

struct Bid {
  std::string agent_id;
  ValuationTensor valuation;
};

// Welfare-maximizing allocation. The forward chain keeps every intermediate
// joint (agents 1..i), which the payment pass reuses as the "everyone before
// j" side of its bridging joins.
struct SolveResult {
  std::vector<Allocation> allocations;  // by bid order
  double social_welfare = 0.0;
  std::vector<JointValuation> forward_chain;
};

// Builds the joint valuation of all bids left to right, takes the global
// maximum (ties resolved to the lowest cell index) and walks the division
// maps back to per-agent allocations.
SolveResult solve_allocation(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                             const JoinOptions& options = {});

// Exclusion compensation: agent j pays the welfare the others would reach
// without j present, minus what they actually reach next to j. Winners are
// the agents whose allocated value is positive; everyone else pays 0. The
// welfare without j comes from joining the prefix of agents before j with a
// suffix joint of the agents after j, so each winner costs one extra join.
struct PaymentResult {
  std::vector<double> payments;
  std::vector<bool> winner;
  // Welfare of the others with agent j absent. Only meaningful for winners;
  // NaN elsewhere.
  std::vector<double> welfare_without;
};

PaymentResult compute_payments(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                               const SolveResult& solved, const JoinOptions& options = {});

struct AuctionResult {
  std::vector<std::string> agent_ids;
  std::vector<Allocation> allocations;
  std::vector<double> values;  // each agent's valuation of their allocation
  std::vector<double> payments;
  std::vector<bool> winner;
  std::vector<double> welfare_without;
  double social_welfare = 0.0;
};

AuctionResult run_vcg_auction(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                              const JoinOptions& options = {});

}  // namespace mrvcg
