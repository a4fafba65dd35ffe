#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrvcg/auction.hpp"
#include "mrvcg/join.hpp"
#include "mrvcg/types.hpp"

namespace mrvcg::verify {

// Reference solver: chains exhaustive joins, so every cell of every
// intermediate joint is the true optimum. Slow but trustworthy; the suites
// measure the production solver against it.
double oracle_social_welfare(const std::vector<Bid>& bids, const ResourceCapacity& cap);
double oracle_welfare_without(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                              std::size_t skip);

// Brute force over complete allocation tuples. Exponential; only for
// instances with a handful of agents over a tiny grid, where it provides a
// second opinion independent of any join at all.
double enumerate_social_welfare(const std::vector<Bid>& bids, const ResourceCapacity& cap);

struct SuiteConfig {
  std::uint64_t seed = 1;
  bool quick = false;  // fewer and smaller trials
  FaultInjection fault = FaultInjection::none;
};

struct SuiteReport {
  std::string name;
  int trials = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

// Suites over randomized instances. Every failure message carries the trial
// number and the instance seed, so a run is reproducible from its master
// seed alone.
//   oracle_equivalence      solver welfare, allocations and payments against
//                           the reference solver, across every index kind
//   subauction_consistency  winners re-auctioned over their combined
//                           allocation keep the same total welfare
//   auction_invariants      feasibility, payment bounds, order invariance,
//                           determinism, welfare monotonicity
//   index_soundness         index candidates against a full scan, for every
//                           index kind
const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& name, const SuiteConfig& config);
std::vector<SuiteReport> run_all_suites(const SuiteConfig& config);

}  // namespace mrvcg::verify
