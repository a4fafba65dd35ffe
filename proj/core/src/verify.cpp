#include "mrvcg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>

#include "mrvcg/datasets.hpp"
#include "mrvcg/errors.hpp"
#include "mrvcg/rng.hpp"
#include "mrvcg/ubds.hpp"
#include "mrvcg/vft_io.hpp"

namespace mrvcg::verify {

namespace {

constexpr int kMaxReportedFailures = 40;

double tol_for(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

// Collects failure lines, each prefixed with enough to reproduce: the trial
// number and the instance seed the trial was built from.
struct Recorder {
  SuiteReport& report;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string context;

  void fail(const std::string& what) {
    if (static_cast<int>(report.failures.size()) == kMaxReportedFailures) {
      report.failures.push_back("... further failures suppressed");
    }
    if (static_cast<int>(report.failures.size()) > kMaxReportedFailures) return;
    report.failures.push_back("trial " + std::to_string(trial) + " (instance seed " +
                              std::to_string(seed) + ", " + context + "): " + what);
  }
  void check_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      fail(what + ": " + format_double(got) + " vs " + format_double(want));
    }
  }
};

struct Instance {
  ResourceCapacity cap;
  std::vector<Bid> bids;
  std::uint64_t seed = 0;
  std::string desc;
};

ValuationTensor random_raw_tensor(const ResourceCapacity& cap, SplitMix64& rng, bool quantized) {
  std::vector<double> values(cap.cell_count(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    // The quantized mode draws from a small grid so that ties are common.
    values[i] = quantized ? std::floor(rng.next_double() * 8.0) / 4.0 : rng.next_double() * 10.0;
  }
  return ValuationTensor(cap, std::move(values));
}

// Small instances drawn half from the dataset generator (separable tensors)
// and half from unstructured values, including deliberately tie-heavy ones.
Instance random_instance(std::uint64_t seed, bool quick, int max_resources) {
  SplitMix64 rng(seed);
  Instance inst;
  inst.seed = seed;
  const int resources = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_resources));
  const int max_units = quick ? 3 : 4;
  std::vector<int> units;
  for (int r = 0; r < resources; ++r) {
    units.push_back(1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_units)));
  }
  inst.cap = ResourceCapacity(units);
  const int n = 2 + static_cast<int>(rng.next_u64() % 4);
  const int mode = static_cast<int>(rng.next_u64() % 4);
  if (mode < 3) {
    DatasetSpec spec;
    spec.kind = static_cast<DatasetKind>(mode);
    spec.clients = n;
    spec.units = units;
    spec.seed = rng.next_u64();
    inst.bids = bids_from_clients(build_dataset(spec));
    inst.desc = dataset_kind_name(spec.kind);
  } else {
    const bool quantized = (rng.next_u64() % 2) == 0;
    for (int i = 0; i < n; ++i) {
      inst.bids.push_back(Bid{"agent_" + std::to_string(i), random_raw_tensor(inst.cap, rng, quantized)});
    }
    inst.desc = quantized ? "raw_quantized" : "raw";
  }
  return inst;
}

DsKind kind_for_trial(int trial) {
  const std::vector<DsKind>& kinds = all_ds_kinds();
  return kinds[static_cast<std::size_t>(trial) % kinds.size()];
}

// kd_tree refuses more than 6 dimensions, so it only sees 1- and 2-resource
// instances.
int max_resources_for(DsKind kind) { return kind == DsKind::kd_tree ? 2 : 3; }

std::vector<double> agent_values(const std::vector<Bid>& bids,
                                 const std::vector<Allocation>& allocations) {
  std::vector<double> values(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    values[i] = bids[i].valuation.value(allocations[i]);
  }
  return values;
}

}  // namespace

// Starting the chain at the first bid instead of an all-zero tensor changes
// intermediate cells (exact sums vs best-within-budget) but not the final
// maximum, which is all the oracle reports.
double oracle_social_welfare(const std::vector<Bid>& bids, const ResourceCapacity& cap) {
  require(!bids.empty(), "oracle needs at least one bid");
  require(bids[0].valuation.capacity().units() == cap.units(),
          "bid valuation capacity does not match the auction capacity");
  ValuationTensor acc = bids[0].valuation;
  for (std::size_t i = 1; i < bids.size(); ++i) {
    acc = naive_join(acc, bids[i].valuation).joint.tensor;
  }
  return acc.max_value();
}

double oracle_welfare_without(const std::vector<Bid>& bids, const ResourceCapacity& cap,
                              std::size_t skip) {
  require(skip < bids.size(), "skip index out of range");
  std::vector<Bid> rest;
  rest.reserve(bids.size() - 1);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (i != skip) rest.push_back(bids[i]);
  }
  if (rest.empty()) return 0.0;
  return oracle_social_welfare(rest, cap);
}

namespace {

void enumerate_rec(const std::vector<Bid>& bids, std::size_t i, Allocation& remaining,
                   double acc, double& best) {
  if (i == bids.size()) {
    best = std::max(best, acc);
    return;
  }
  const int resources = static_cast<int>(remaining.size());
  Allocation a(remaining.size(), 0);
  while (true) {
    Allocation rest(remaining.size());
    for (int r = 0; r < resources; ++r) rest[static_cast<std::size_t>(r)] = remaining[static_cast<std::size_t>(r)] - a[static_cast<std::size_t>(r)];
    enumerate_rec(bids, i + 1, rest, acc + bids[i].valuation.value(a), best);
    int r = resources - 1;
    while (r >= 0) {
      if (a[static_cast<std::size_t>(r)] < remaining[static_cast<std::size_t>(r)]) {
        ++a[static_cast<std::size_t>(r)];
        break;
      }
      a[static_cast<std::size_t>(r)] = 0;
      --r;
    }
    if (r < 0) break;
  }
}

}  // namespace

double enumerate_social_welfare(const std::vector<Bid>& bids, const ResourceCapacity& cap) {
  require(!bids.empty(), "enumeration needs at least one bid");
  for (const Bid& bid : bids) {
    require(bid.valuation.capacity().units() == cap.units(),
            "bid valuation capacity does not match the auction capacity");
  }
  double best = 0.0;
  Allocation remaining = cap.units();
  enumerate_rec(bids, 0, remaining, 0.0, best);
  return best;
}

namespace {

SuiteReport oracle_equivalence(const SuiteConfig& config) {
  SuiteReport report{"oracle_equivalence", 0, {}};
  SplitMix64 master(config.seed);
  const int trials = config.quick ? 40 : 120;
  for (int t = 0; t < trials; ++t) {
    const DsKind kind = kind_for_trial(t);
    Instance inst = random_instance(master.next_u64(), config.quick, max_resources_for(kind));
    Recorder rec{report, t, inst.seed, inst.desc + ", ds=" + std::string(ds_kind_name(kind))};
    ++report.trials;

    JoinOptions opt;
    opt.ds_kind = kind;
    opt.fault = config.fault;
    opt.collect_timing = false;
    const AuctionResult res = run_vcg_auction(inst.bids, inst.cap, opt);

    const double oracle_sw = oracle_social_welfare(inst.bids, inst.cap);
    const double tol = tol_for(oracle_sw);
    rec.check_close(res.social_welfare, oracle_sw, tol, "social welfare vs reference");

    double sum = 0.0;
    for (double v : res.values) sum += v;
    rec.check_close(sum, res.social_welfare, tol, "allocation values vs social welfare");

    for (int r = 0; r < inst.cap.resources(); ++r) {
      long long granted = 0;
      for (const Allocation& a : res.allocations) granted += a[static_cast<std::size_t>(r)];
      if (granted > inst.cap.units(r)) {
        rec.fail("allocation exceeds capacity in resource " + std::to_string(r));
      }
    }

    for (std::size_t j = 0; j < inst.bids.size(); ++j) {
      if (!res.winner[j]) {
        if (res.payments[j] != 0.0) rec.fail(res.agent_ids[j] + ": non-winner pays");
        continue;
      }
      const double wo = oracle_welfare_without(inst.bids, inst.cap, j);
      const double expected = wo - (res.social_welfare - res.values[j]);
      rec.check_close(res.payments[j], expected, tol_for(wo),
                      res.agent_ids[j] + ": payment vs reference");
    }

    if (inst.cap.cell_count() <= 16 && inst.bids.size() <= 3) {
      const double enum_sw = enumerate_social_welfare(inst.bids, inst.cap);
      rec.check_close(oracle_sw, enum_sw, tol, "reference solvers disagree");
    }
  }
  return report;
}

SuiteReport subauction_consistency(const SuiteConfig& config) {
  SuiteReport report{"subauction_consistency", 0, {}};
  SplitMix64 master(config.seed);
  const int trials = config.quick ? 30 : 100;
  for (int t = 0; t < trials; ++t) {
    const DsKind kind = kind_for_trial(t);
    Instance inst = random_instance(master.next_u64(), config.quick, max_resources_for(kind));
    Recorder rec{report, t, inst.seed, inst.desc + ", ds=" + std::string(ds_kind_name(kind))};
    ++report.trials;

    JoinOptions opt;
    opt.ds_kind = kind;
    opt.fault = config.fault;
    opt.collect_timing = false;
    const SolveResult solved = solve_allocation(inst.bids, inst.cap, opt);
    const std::vector<double> values = agent_values(inst.bids, solved.allocations);

    SplitMix64 pick(inst.seed ^ 0x5eed5eed5eed5eedull);
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < inst.bids.size(); ++i) {
      if (values[i] > 0.0 && (pick.next_u64() & 1u)) group.push_back(i);
    }
    if (group.empty()) {
      for (std::size_t i = 0; i < inst.bids.size(); ++i) {
        if (values[i] > 0.0) group.push_back(i);
      }
    }
    if (group.empty()) continue;

    Allocation combined(static_cast<std::size_t>(inst.cap.resources()), 0);
    double expect = 0.0;
    for (std::size_t i : group) {
      for (int r = 0; r < inst.cap.resources(); ++r) {
        combined[static_cast<std::size_t>(r)] += solved.allocations[i][static_cast<std::size_t>(r)];
      }
      expect += values[i];
    }
    if (std::find(combined.begin(), combined.end(), 0) != combined.end()) continue;

    const ResourceCapacity subcap(combined);
    std::vector<Bid> sub_bids;
    for (std::size_t i : group) {
      sub_bids.push_back(Bid{inst.bids[i].agent_id, inst.bids[i].valuation.restricted(subcap)});
    }
    const SolveResult sub = solve_allocation(sub_bids, subcap, opt);
    rec.check_close(sub.social_welfare, expect, tol_for(expect),
                    "winners re-auctioned over their own bundle");
  }
  return report;
}

SuiteReport auction_invariants(const SuiteConfig& config) {
  SuiteReport report{"auction_invariants", 0, {}};
  SplitMix64 master(config.seed);
  const int trials = config.quick ? 30 : 100;
  for (int t = 0; t < trials; ++t) {
    const DsKind kind = kind_for_trial(t);
    Instance inst = random_instance(master.next_u64(), config.quick, max_resources_for(kind));
    Recorder rec{report, t, inst.seed, inst.desc + ", ds=" + std::string(ds_kind_name(kind))};
    ++report.trials;

    JoinOptions opt;
    opt.ds_kind = kind;
    opt.fault = config.fault;
    opt.collect_timing = false;
    const AuctionResult res = run_vcg_auction(inst.bids, inst.cap, opt);
    const double tol = tol_for(res.social_welfare);

    if (!std::isfinite(res.social_welfare) || res.social_welfare < 0.0) {
      rec.fail("social welfare is not a finite nonnegative number");
    }

    // Handing the whole capacity to any single agent is feasible, so the
    // welfare can never fall below the best single-agent value.
    double best_single = 0.0;
    for (const Bid& bid : inst.bids) best_single = std::max(best_single, bid.valuation.max_value());
    if (res.social_welfare < best_single - tol_for(best_single)) {
      rec.fail("social welfare " + format_double(res.social_welfare) +
               " below best single-agent value " + format_double(best_single));
    }

    for (int r = 0; r < inst.cap.resources(); ++r) {
      long long granted = 0;
      for (const Allocation& a : res.allocations) granted += a[static_cast<std::size_t>(r)];
      if (granted > inst.cap.units(r)) {
        rec.fail("allocation exceeds capacity in resource " + std::to_string(r));
      }
    }

    double sum = 0.0;
    for (double v : res.values) sum += v;
    rec.check_close(sum, res.social_welfare, tol, "allocation values vs social welfare");

    for (std::size_t j = 0; j < inst.bids.size(); ++j) {
      if (!res.winner[j]) {
        if (res.payments[j] != 0.0) rec.fail(res.agent_ids[j] + ": non-winner pays");
        if (res.values[j] != 0.0) rec.fail(res.agent_ids[j] + ": non-winner holds value");
        continue;
      }
      if (res.payments[j] < -tol) rec.fail(res.agent_ids[j] + ": negative payment");
      if (res.payments[j] > res.values[j] + tol) {
        rec.fail(res.agent_ids[j] + ": payment above own value");
      }
      if (res.welfare_without[j] > res.social_welfare + tol_for(res.social_welfare)) {
        rec.fail(res.agent_ids[j] + ": removing the agent raised welfare");
      }
    }

    if (inst.bids.size() > 1) {
      std::vector<Bid> fewer(inst.bids.begin(), inst.bids.end() - 1);
      const SolveResult less = solve_allocation(fewer, inst.cap, opt);
      if (less.social_welfare > res.social_welfare + tol) {
        rec.fail("dropping a bid raised welfare");
      }
    }

    std::vector<Bid> shuffled = inst.bids;
    SplitMix64 shuffle_rng(inst.seed ^ 0xf00dd00ff00dd00full);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[shuffle_rng.next_u64() % i]);
    }
    const AuctionResult res2 = run_vcg_auction(shuffled, inst.cap, opt);
    rec.check_close(res2.social_welfare, res.social_welfare, tol,
                    "social welfare depends on bid order");
    if (inst.desc != "raw_quantized") {
      // Tie-free instances: payments belong to the agent, not the position.
      std::map<std::string, double> by_id;
      for (std::size_t j = 0; j < res2.agent_ids.size(); ++j) {
        by_id[res2.agent_ids[j]] = res2.payments[j];
      }
      for (std::size_t j = 0; j < res.agent_ids.size(); ++j) {
        rec.check_close(by_id[res.agent_ids[j]], res.payments[j], tol,
                        res.agent_ids[j] + ": payment depends on bid order");
      }
    }

    const AuctionResult res3 = run_vcg_auction(inst.bids, inst.cap, opt);
    if (res3.social_welfare != res.social_welfare || res3.payments != res.payments ||
        res3.allocations != res.allocations) {
      rec.fail("rerun with identical inputs is not bit-identical");
    }
  }
  return report;
}

SuiteReport index_soundness(const SuiteConfig& config) {
  SuiteReport report{"index_soundness", 0, {}};
  SplitMix64 master(config.seed);
  const int trials = config.quick ? 40 : 120;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = master.next_u64();
    SplitMix64 rng(seed);
    const int resources = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<int> units;
    for (int r = 0; r < resources; ++r) {
      units.push_back(1 + static_cast<int>(rng.next_u64() % 5));
    }
    const ResourceCapacity cap(units);
    const bool quantized = (rng.next_u64() & 1u) != 0;
    const ValuationTensor stored_side = random_raw_tensor(cap, rng, quantized);
    const ValuationTensor query_side = random_raw_tensor(cap, rng, false);
    ++report.trials;

    const std::vector<std::uint32_t> survivors = pareto_survivors(stored_side);
    const UbVectorSet set = build_ub_vectors(stored_side, survivors);
    const int dims = set.dims();

    std::vector<QueryBound> bounds;
    for (std::uint32_t qc : pareto_survivors(query_side)) {
      bounds.push_back(make_query_bound(query_side, cap.allocation_of(qc)));
    }
    QueryBound everything;
    everything.coords.assign(static_cast<std::size_t>(dims), kUnbounded);
    bounds.push_back(everything);
    QueryBound nothing;
    nothing.coords.assign(static_cast<std::size_t>(dims), -kUnbounded);
    bounds.push_back(nothing);

    for (DsKind kind : all_ds_kinds()) {
      if (kind == DsKind::kd_tree && (dims > 6 || set.count() > 1024)) continue;
      Recorder rec{report, t, seed,
                   std::string("n=") + std::to_string(set.count()) + ", ds=" + std::string(ds_kind_name(kind))};
      const UpperBoundIndex index = UpperBoundIndex::build(kind, set, cap);
      QueryHandle handle;
      std::vector<std::uint32_t> ids;
      for (std::size_t q = 0; q < bounds.size(); ++q) {
        const QueryBound& bound = bounds[q];
        std::vector<std::uint32_t> expected;
        for (std::size_t i = 0; i < set.count(); ++i) {
          if (bounded_by(set.coords_of(i), bound, dims)) {
            expected.push_back(static_cast<std::uint32_t>(i));
          }
        }
        index.query(bound, handle);
        index.fetch_ids(handle, ids);
        std::vector<std::uint32_t> candidates = ids;
        std::sort(candidates.begin(), candidates.end());
        if (std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end()) {
          rec.fail("query " + std::to_string(q) + " returned duplicate candidates");
          continue;
        }
        std::vector<std::uint32_t> matched;
        for (std::uint32_t id : candidates) {
          if (bounded_by(set.coords_of(id), bound, dims)) matched.push_back(id);
        }
        if (matched != expected) {
          rec.fail("query " + std::to_string(q) + " answers differ from a full scan (" +
                   std::to_string(matched.size()) + " vs " + std::to_string(expected.size()) + ")");
        }
        if ((kind == DsKind::linear_scan || kind == DsKind::kd_tree) && candidates != expected) {
          rec.fail("query " + std::to_string(q) + " returned false positives");
        }
      }
    }
  }
  return report;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "oracle_equivalence", "subauction_consistency", "auction_invariants", "index_soundness"};
  return names;
}

SuiteReport run_suite(const std::string& name, const SuiteConfig& config) {
  if (name == "oracle_equivalence") return oracle_equivalence(config);
  if (name == "subauction_consistency") return subauction_consistency(config);
  if (name == "auction_invariants") return auction_invariants(config);
  if (name == "index_soundness") return index_soundness(config);
  throw IoError("unknown suite '" + name + "'");
}

std::vector<SuiteReport> run_all_suites(const SuiteConfig& config) {
  std::vector<SuiteReport> out;
  for (const std::string& name : suite_names()) out.push_back(run_suite(name, config));
  return out;
}

}  // namespace mrvcg::verify
