#include "mrvcg/auction.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

#include "mrvcg/errors.hpp"

namespace mrvcg {

namespace {

void check_bids(const std::vector<Bid>& bids, const ResourceCapacity& cap) {
  require(!bids.empty(), "auction needs at least one bid");
  std::unordered_set<std::string> seen;
  for (const Bid& bid : bids) {
    require(!bid.agent_id.empty(), "bid agent_id must be non-empty");
    require(seen.insert(bid.agent_id).second, "duplicate agent_id among bids");
    require(bid.valuation.capacity().units() == cap.units(),
            "bid valuation capacity does not match the auction capacity");
  }
}

}  // namespace

SolveResult solve_allocation(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                             const JoinOptions& options) {
  check_bids(bids, cap);
  const std::size_t n = bids.size();

  SolveResult out;
  out.forward_chain.reserve(n);
  ValuationTensor identity = ValuationTensor::zeros(cap);
  const ValuationTensor* prev = &identity;
  for (std::size_t i = 0; i < n; ++i) {
    out.forward_chain.push_back(join(*prev, bids[i].valuation, options));
    prev = &out.forward_chain.back().tensor;
  }

  const JointValuation& full = out.forward_chain.back();
  std::uint32_t cell = static_cast<std::uint32_t>(full.tensor.argmax());
  out.social_welfare = full.tensor.value(cell);

  // Each division map splits its cell between "agents before i" (left) and
  // agent i (right); an unfilled cell means nobody in that prefix takes
  // anything.
  out.allocations.assign(n, Allocation(static_cast<std::size_t>(cap.resources()), 0));
  for (std::size_t i = n; i-- > 0;) {
    const auto [left, right] = out.forward_chain[i].division_at(cell);
    out.allocations[i] = right;
    cell = static_cast<std::uint32_t>(cap.linear_index(left));
  }
  return out;
}

PaymentResult compute_payments(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                               const SolveResult& solved, const JoinOptions& options) {
  check_bids(bids, cap);
  const std::size_t n = bids.size();
  require(solved.allocations.size() == n && solved.forward_chain.size() == n,
          "solve result does not match the bid list");

  PaymentResult out;
  out.payments.assign(n, 0.0);
  out.winner.assign(n, false);
  out.welfare_without.assign(n, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> values(n, 0.0);
  bool any_winner = false;
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = bids[i].valuation.value(solved.allocations[i]);
    if (values[i] > 0.0) {
      out.winner[i] = true;
      any_winner = true;
    }
  }
  if (!any_winner) return out;

  // suffix[i] = joint valuation of bids i..n-1; suffix[n] covers nobody.
  std::vector<ValuationTensor> suffix;
  suffix.reserve(n + 1);
  suffix.resize(n + 1, ValuationTensor::zeros(cap));
  for (std::size_t i = n; i-- > 1;) {
    suffix[i] = join(bids[i].valuation, suffix[i + 1], options).tensor;
  }

  const ValuationTensor identity = ValuationTensor::zeros(cap);
  for (std::size_t j = 0; j < n; ++j) {
    if (!out.winner[j]) continue;
    const ValuationTensor& before = (j == 0) ? identity : solved.forward_chain[j - 1].tensor;
    const ValuationTensor& after = (j + 1 < n) ? suffix[j + 1] : identity;
    JointValuation others = join(before, after, options);
    const double welfare_without_j = others.tensor.value(others.tensor.argmax());
    out.welfare_without[j] = welfare_without_j;
    out.payments[j] = welfare_without_j - (solved.social_welfare - values[j]);
  }
  return out;
}

AuctionResult run_vcg_auction(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                              const JoinOptions& options) {
  SolveResult solved = solve_allocation(bids, cap, options);
  PaymentResult paid = compute_payments(bids, cap, solved, options);

  AuctionResult out;
  const std::size_t n = bids.size();
  out.agent_ids.reserve(n);
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.agent_ids.push_back(bids[i].agent_id);
    out.values.push_back(bids[i].valuation.value(solved.allocations[i]));
  }
  out.allocations = std::move(solved.allocations);
  out.payments = std::move(paid.payments);
  out.winner = std::move(paid.winner);
  out.welfare_without = std::move(paid.welfare_without);
  out.social_welfare = solved.social_welfare;
  return out;
}

}  // namespace mrvcg
