#include "mrvcg/baselines.hpp"

#include <cmath>
#include <unordered_set>

#include "mrvcg/auction.hpp"
#include "mrvcg/errors.hpp"

namespace mrvcg {

namespace {

void check_single_resource_bids(const std::vector<SingleResourceBid>& bids, int units) {
  require(units >= 1, "auction needs at least one unit");
  require(!bids.empty(), "auction needs at least one bid");
  std::unordered_set<std::string> seen;
  for (const SingleResourceBid& bid : bids) {
    require(!bid.agent_id.empty(), "bid agent_id must be non-empty");
    require(seen.insert(bid.agent_id).second, "duplicate agent_id among bids");
    require(bid.values.size() == static_cast<std::size_t>(units) + 1,
            "bid must value every count from 0 to the full capacity");
    require(bid.values[0] == 0.0, "value of zero units must be 0");
    const double slack = 1e-9 * std::max(1.0, bid.values.back());
    for (int u = 0; u < units; ++u) {
      const double gain = bid.values[static_cast<std::size_t>(u) + 1] -
                          bid.values[static_cast<std::size_t>(u)];
      require(std::isfinite(gain) && gain > 0.0, "bid values must be strictly increasing");
      if (u > 0) {
        const double prev = bid.values[static_cast<std::size_t>(u)] -
                            bid.values[static_cast<std::size_t>(u) - 1];
        require(gain <= prev + slack, "bid marginal gains must be non-increasing");
      }
    }
  }
}

// skip == bids.size() keeps everyone in.
std::vector<int> greedy_units(const std::vector<SingleResourceBid>& bids, int units,
                              std::size_t skip) {
  std::vector<int> won(bids.size(), 0);
  for (int round = 0; round < units; ++round) {
    std::size_t best = bids.size();
    double best_gain = 0.0;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      if (i == skip || won[i] >= units) continue;
      const double gain = bids[i].values[static_cast<std::size_t>(won[i]) + 1] -
                          bids[i].values[static_cast<std::size_t>(won[i])];
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == bids.size()) break;
    ++won[best];
  }
  return won;
}

double welfare_of(const std::vector<SingleResourceBid>& bids, const std::vector<int>& won) {
  double sum = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    sum += bids[i].values[static_cast<std::size_t>(won[i])];
  }
  return sum;
}

}  // namespace

ConcaveAuctionResult concave_auction(const std::vector<SingleResourceBid>& bids, int units) {
  check_single_resource_bids(bids, units);
  const std::size_t n = bids.size();

  ConcaveAuctionResult out;
  out.units_won = greedy_units(bids, units, n);
  out.social_welfare = welfare_of(bids, out.units_won);
  out.values.resize(n);
  out.payments.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = bids[i].values[static_cast<std::size_t>(out.units_won[i])];
    if (out.units_won[i] == 0) continue;
    const double without = welfare_of(bids, greedy_units(bids, units, i));
    out.payments[i] = without - (out.social_welfare - out.values[i]);
  }
  return out;
}

SeparateAuctionsResult separate_auctions(const std::vector<GeneratedClient>& clients,
                                         const JoinOptions& options) {
  require(!clients.empty(), "separate auctions need at least one client");
  const ResourceCapacity& cap = clients.front().valuation.capacity();
  const int resources = cap.resources();
  for (const GeneratedClient& c : clients) {
    require(c.valuation.capacity().units() == cap.units(),
            "clients must share one capacity");
    require(static_cast<int>(c.components.size()) == resources,
            "client is missing its per-resource curves");
    require(c.max_value > 0.0, "client max_value must be positive");
  }

  SeparateAuctionsResult out;
  out.winnings.assign(clients.size(), Allocation(static_cast<std::size_t>(resources), 0));
  for (int r = 0; r < resources; ++r) {
    std::vector<SingleResourceBid> bids;
    bids.reserve(clients.size());
    for (const GeneratedClient& c : clients) {
      const double budget = c.max_value / resources;
      std::vector<double> values = c.components[static_cast<std::size_t>(r)];
      for (double& v : values) v *= budget;
      bids.push_back(SingleResourceBid{c.agent_id, std::move(values)});
    }
    const ConcaveAuctionResult res = concave_auction(bids, cap.units(r));
    for (std::size_t i = 0; i < clients.size(); ++i) {
      out.winnings[i][static_cast<std::size_t>(r)] = res.units_won[i];
    }
  }

  for (std::size_t i = 0; i < clients.size(); ++i) {
    out.achieved_welfare += clients[i].valuation.value(out.winnings[i]);
  }
  out.optimal_welfare =
      solve_allocation(bids_from_clients(clients), cap, options).social_welfare;
  require(out.optimal_welfare > 0.0, "combined auction produced no welfare");
  out.ratio = out.achieved_welfare / out.optimal_welfare;
  return out;
}

}  // namespace mrvcg
