#include <cmath>
#include <vector>

#include "doctest.h"
#include "mrvcg/auction.hpp"
#include "mrvcg/baselines.hpp"
#include "mrvcg/datasets.hpp"

using namespace mrvcg;

TEST_CASE("greedy single-resource auction, worked example") {
  // Marginal gains: A = 10, 6, 2 and B = 8, 6, 5. Greedy hands out
  // 10 (A), 8 (B), then breaks the 6-vs-6 tie toward A.
  std::vector<SingleResourceBid> bids = {
      {"A", {0.0, 10.0, 16.0, 18.0}},
      {"B", {0.0, 8.0, 14.0, 19.0}},
  };
  ConcaveAuctionResult res = concave_auction(bids, 3);
  CHECK(res.units_won == std::vector<int>{2, 1});
  CHECK(res.values == std::vector<double>{16.0, 8.0});
  CHECK(res.social_welfare == 24.0);
  // Alone, B would take all three units for 19, so A owes 19 - (24 - 16).
  // Alone, A would reach 18, so B owes 18 - (24 - 8).
  CHECK(res.payments == std::vector<double>{11.0, 2.0});
}

TEST_CASE("single greedy bidder takes everything and pays nothing") {
  std::vector<SingleResourceBid> bids = {{"solo", {0.0, 5.0, 8.0, 9.0}}};
  ConcaveAuctionResult res = concave_auction(bids, 3);
  CHECK(res.units_won == std::vector<int>{3});
  CHECK(res.social_welfare == 9.0);
  CHECK(res.payments == std::vector<double>{0.0});
}

TEST_CASE("greedy bid validation") {
  SUBCASE("wrong length") {
    std::vector<SingleResourceBid> bids = {{"A", {0.0, 1.0}}};
    CHECK_THROWS_AS(concave_auction(bids, 3), ContractViolation);
  }
  SUBCASE("nonzero start") {
    std::vector<SingleResourceBid> bids = {{"A", {1.0, 2.0, 3.0, 4.0}}};
    CHECK_THROWS_AS(concave_auction(bids, 3), ContractViolation);
  }
  SUBCASE("flat step") {
    std::vector<SingleResourceBid> bids = {{"A", {0.0, 2.0, 2.0, 3.0}}};
    CHECK_THROWS_AS(concave_auction(bids, 3), ContractViolation);
  }
  SUBCASE("convex step") {
    std::vector<SingleResourceBid> bids = {{"A", {0.0, 1.0, 3.0, 6.0}}};
    CHECK_THROWS_AS(concave_auction(bids, 3), ContractViolation);
  }
  SUBCASE("no bids") {
    CHECK_THROWS_AS(concave_auction({}, 3), ContractViolation);
  }
}

TEST_CASE("greedy matches the tensor solver on concave single-resource data") {
  DatasetSpec spec;
  spec.kind = DatasetKind::concave;
  spec.clients = 6;
  spec.units = {8};
  spec.seed = 404;
  std::vector<GeneratedClient> clients = build_dataset(spec);

  std::vector<SingleResourceBid> greedy_bids;
  for (const GeneratedClient& c : clients) {
    std::vector<double> curve(c.components[0].size());
    for (std::size_t u = 0; u < curve.size(); ++u) curve[u] = c.max_value * c.components[0][u];
    greedy_bids.push_back({c.agent_id, std::move(curve)});
  }
  ConcaveAuctionResult greedy = concave_auction(greedy_bids, 8);

  ResourceCapacity cap(spec.units);
  AuctionResult exact = run_vcg_auction(bids_from_clients(clients), cap);

  CHECK(exact.social_welfare == doctest::Approx(greedy.social_welfare).epsilon(1e-12));
  for (std::size_t k = 0; k < clients.size(); ++k) {
    CHECK(exact.payments[k] == doctest::Approx(greedy.payments[k]).epsilon(1e-12));
    CHECK(exact.allocations[k][0] == greedy.units_won[k]);
  }
}

TEST_CASE("separate per-resource auctions on one resource give up nothing") {
  DatasetSpec spec;
  spec.kind = DatasetKind::concave;
  spec.clients = 5;
  spec.units = {6};
  spec.seed = 405;
  std::vector<GeneratedClient> clients = build_dataset(spec);
  SeparateAuctionsResult res = separate_auctions(clients);
  CHECK(res.ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.achieved_welfare == doctest::Approx(res.optimal_welfare).epsilon(1e-12));
}

TEST_CASE("separate per-resource auctions stay feasible and never beat the optimum") {
  DatasetSpec spec;
  spec.kind = DatasetKind::concave;
  spec.clients = 8;
  spec.units = {5, 5};
  spec.seed = 406;
  std::vector<GeneratedClient> clients = build_dataset(spec);
  SeparateAuctionsResult res = separate_auctions(clients);
  CHECK(res.optimal_welfare > 0.0);
  CHECK(res.achieved_welfare >= 0.0);
  CHECK(res.ratio <= 1.0 + 1e-12);
  CHECK(res.ratio == res.achieved_welfare / res.optimal_welfare);
  REQUIRE(res.winnings.size() == clients.size());
  for (int r = 0; r < 2; ++r) {
    int total = 0;
    for (const Allocation& w : res.winnings) total += w[static_cast<std::size_t>(r)];
    CHECK(total <= spec.units[static_cast<std::size_t>(r)]);
  }
}
