#include <cmath>
#include <vector>

#include "doctest.h"
#include "mrvcg/auction.hpp"
#include "mrvcg/rng.hpp"

using namespace mrvcg;

namespace {

Bid bid(std::string id, const ResourceCapacity& cap, std::vector<double> values) {
  return Bid{std::move(id), ValuationTensor(cap, std::move(values))};
}

}  // namespace

TEST_CASE("two-agent single-unit auction reduces to a second-price sale") {
  ResourceCapacity cap({1});
  std::vector<Bid> bids;
  bids.push_back(bid("alice", cap, {0.0, 5.0}));
  bids.push_back(bid("bob", cap, {0.0, 3.0}));

  AuctionResult res = run_vcg_auction(bids, cap);
  CHECK(res.social_welfare == 5.0);
  CHECK(res.allocations[0] == Allocation{1});
  CHECK(res.allocations[1] == Allocation{0});
  CHECK(res.winner[0]);
  CHECK_FALSE(res.winner[1]);
  CHECK(res.values[0] == 5.0);
  CHECK(res.values[1] == 0.0);
  // The winner pays the displaced bid, the loser pays nothing.
  CHECK(res.payments[0] == 3.0);
  CHECK(res.payments[1] == 0.0);
  CHECK(res.welfare_without[0] == 3.0);
  CHECK(std::isnan(res.welfare_without[1]));
}

TEST_CASE("a lone bidder takes everything worth taking and pays nothing") {
  ResourceCapacity cap({2});
  std::vector<Bid> bids;
  bids.push_back(bid("solo", cap, {0.0, 5.0, 8.0}));
  AuctionResult res = run_vcg_auction(bids, cap);
  CHECK(res.social_welfare == 8.0);
  CHECK(res.allocations[0] == Allocation{2});
  CHECK(res.payments[0] == 0.0);
  CHECK(res.winner[0]);
  CHECK(res.welfare_without[0] == 0.0);
}

TEST_CASE("an all-zero bid never wins and never pays") {
  ResourceCapacity cap({2});
  std::vector<Bid> bids;
  bids.push_back(bid("real", cap, {0.0, 4.0, 6.0}));
  bids.push_back(bid("empty", cap, {0.0, 0.0, 0.0}));
  AuctionResult res = run_vcg_auction(bids, cap);
  CHECK(res.social_welfare == 6.0);
  CHECK_FALSE(res.winner[1]);
  CHECK(res.values[1] == 0.0);
  CHECK(res.payments[1] == 0.0);
  CHECK(std::isnan(res.welfare_without[1]));
}

TEST_CASE("complementary demands split the bundle") {
  ResourceCapacity cap({1, 1});
  // One agent only values resource 0, the other only resource 1.
  std::vector<double> wants_first = {0.0, 0.0, 7.0, 7.0};   // cells: (0,0),(0,1),(1,0),(1,1)
  std::vector<double> wants_second = {0.0, 9.0, 0.0, 9.0};
  std::vector<Bid> bids;
  bids.push_back(bid("first", cap, wants_first));
  bids.push_back(bid("second", cap, wants_second));
  AuctionResult res = run_vcg_auction(bids, cap);
  CHECK(res.social_welfare == 16.0);
  CHECK(res.allocations[0] == Allocation{1, 0});
  CHECK(res.allocations[1] == Allocation{0, 1});
  // Neither agent displaces the other: without "first", "second" still only
  // reaches 9, so "first" pays 9 - (16 - 7) = 0. Symmetrically for "second".
  CHECK(res.payments[0] == 0.0);
  CHECK(res.payments[1] == 0.0);
}

TEST_CASE("competing demands produce a real exclusion price") {
  ResourceCapacity cap({2});
  std::vector<Bid> bids;
  bids.push_back(bid("big", cap, {0.0, 6.0, 10.0}));
  bids.push_back(bid("small", cap, {0.0, 5.0, 7.0}));
  // Best split: one unit each, welfare 11. Without "big", "small" takes both
  // units for 7; "big" pays 7 - (11 - 6) = 2. Without "small", "big" reaches
  // 10; "small" pays 10 - (11 - 5) = 4.
  AuctionResult res = run_vcg_auction(bids, cap);
  CHECK(res.social_welfare == 11.0);
  CHECK(res.allocations[0] == Allocation{1});
  CHECK(res.allocations[1] == Allocation{1});
  CHECK(res.payments[0] == 2.0);
  CHECK(res.payments[1] == 4.0);
}

TEST_CASE("solve keeps the full forward chain") {
  ResourceCapacity cap({2});
  std::vector<Bid> bids;
  bids.push_back(bid("a", cap, {0.0, 1.0, 2.0}));
  bids.push_back(bid("b", cap, {0.0, 2.0, 3.0}));
  bids.push_back(bid("c", cap, {0.0, 3.0, 4.0}));
  SolveResult solved = solve_allocation(bids, cap);
  REQUIRE(solved.forward_chain.size() == bids.size());
  // Chain entry i is the joint of bids 0..i; its maximum can only grow.
  double prev = 0.0;
  for (const JointValuation& link : solved.forward_chain) {
    CHECK(link.tensor.max_value() >= prev);
    prev = link.tensor.max_value();
  }
  CHECK(solved.social_welfare == prev);
  // Best split of the two units is one to b and one to c.
  CHECK(solved.social_welfare == 5.0);
  CHECK(solved.allocations[0] == Allocation{0});
  CHECK(solved.allocations[1] == Allocation{1});
  CHECK(solved.allocations[2] == Allocation{1});
}

TEST_CASE("bid validation") {
  ResourceCapacity cap({1});
  SUBCASE("no bids") {
    CHECK_THROWS_AS(run_vcg_auction({}, cap), ContractViolation);
  }
  SUBCASE("duplicate agent ids") {
    std::vector<Bid> bids;
    bids.push_back(bid("dup", cap, {0.0, 1.0}));
    bids.push_back(bid("dup", cap, {0.0, 2.0}));
    CHECK_THROWS_AS(run_vcg_auction(bids, cap), ContractViolation);
  }
  SUBCASE("empty agent id") {
    std::vector<Bid> bids;
    bids.push_back(bid("", cap, {0.0, 1.0}));
    CHECK_THROWS_AS(run_vcg_auction(bids, cap), ContractViolation);
  }
  SUBCASE("capacity mismatch") {
    std::vector<Bid> bids;
    bids.push_back(bid("odd", ResourceCapacity({2}), {0.0, 1.0, 2.0}));
    CHECK_THROWS_AS(run_vcg_auction(bids, cap), ContractViolation);
  }
}

TEST_CASE("payments agree across index kinds") {
  SplitMix64 rng(91);
  ResourceCapacity cap({3, 3});
  std::vector<Bid> bids;
  for (int k = 0; k < 4; ++k) {
    std::vector<double> values(cap.cell_count(), 0.0);
    for (std::size_t i = 1; i < values.size(); ++i) values[i] = rng.next_double() * 9.0;
    bids.push_back(Bid{"agent_" + std::to_string(k), ValuationTensor(cap, std::move(values))});
  }
  JoinOptions base;
  base.ds_kind = DsKind::linear_scan;
  const AuctionResult ref = run_vcg_auction(bids, cap, base);
  for (DsKind kind : all_ds_kinds()) {
    JoinOptions opt;
    opt.ds_kind = kind;
    const AuctionResult res = run_vcg_auction(bids, cap, opt);
    CHECK(res.social_welfare == ref.social_welfare);
    CHECK(res.payments == ref.payments);
    CHECK(res.winner == ref.winner);
  }
}
