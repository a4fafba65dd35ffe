#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "mrvcg/auction.hpp"
#include "mrvcg/datasets.hpp"
#include "mrvcg/join.hpp"
#include "mrvcg/types.hpp"
#include "mrvcg/ubds.hpp"

using namespace mrvcg;

namespace {

std::vector<GeneratedClient> make_clients(DatasetKind kind, int clients, std::vector<int> units,
                                          std::uint64_t seed) {
  DatasetSpec spec;
  spec.kind = kind;
  spec.clients = clients;
  spec.units = std::move(units);
  spec.seed = seed;
  return build_dataset(spec);
}

void BM_FilteredJoin(benchmark::State& state, DsKind kind) {
  const int units = static_cast<int>(state.range(0));
  const auto clients = make_clients(DatasetKind::increasing, 2, {units}, 1);
  JoinOptions options;
  options.ds_kind = kind;
  options.collect_timing = false;
  for (auto _ : state) {
    JointValuation j = join(clients[0].valuation, clients[1].valuation, options);
    benchmark::DoNotOptimize(j);
  }
  state.SetComplexityN(units);
}

void BM_NaiveJoin(benchmark::State& state) {
  const int units = static_cast<int>(state.range(0));
  const auto clients = make_clients(DatasetKind::increasing, 2, {units}, 1);
  for (auto _ : state) {
    NaiveJoinResult r = naive_join(clients[0].valuation, clients[1].valuation);
    benchmark::DoNotOptimize(r);
  }
  state.SetComplexityN(units);
}

void BM_IndexConstruct(benchmark::State& state, DsKind kind) {
  const int units = static_cast<int>(state.range(0));
  const auto clients = make_clients(DatasetKind::increasing, 1, {units}, 1);
  const ValuationTensor& v = clients[0].valuation;
  const std::vector<std::uint32_t> cells = pareto_survivors(v);
  for (auto _ : state) {
    UpperBoundIndex index = UpperBoundIndex::build(kind, build_ub_vectors(v, cells), v.capacity());
    benchmark::DoNotOptimize(index);
  }
}

void BM_IndexQuery(benchmark::State& state, DsKind kind) {
  const int units = static_cast<int>(state.range(0));
  const auto clients = make_clients(DatasetKind::increasing, 2, {units}, 1);
  const ValuationTensor& stored = clients[0].valuation;
  const ValuationTensor& querying = clients[1].valuation;
  const UpperBoundIndex index =
      UpperBoundIndex::build(kind, build_ub_vectors(stored, pareto_survivors(stored)), stored.capacity());

  std::vector<QueryBound> bounds;
  for (std::uint32_t cell : pareto_survivors(querying)) {
    bounds.push_back(make_query_bound(querying, querying.capacity().allocation_of(cell)));
  }
  QueryHandle handle;
  std::size_t next = 0;
  for (auto _ : state) {
    index.query(bounds[next], handle);
    benchmark::DoNotOptimize(handle.candidate_count());
    next = (next + 1) % bounds.size();
  }
}

void BM_FullAuction(benchmark::State& state) {
  const int clients = static_cast<int>(state.range(0));
  const auto generated = make_clients(DatasetKind::increasing, clients, {15, 15}, 1);
  const std::vector<Bid> bids = bids_from_clients(generated);
  const ResourceCapacity cap({15, 15});
  for (auto _ : state) {
    AuctionResult res = run_vcg_auction(bids, cap);
    benchmark::DoNotOptimize(res);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_FilteredJoin, linear_scan, DsKind::linear_scan)
    ->RangeMultiplier(4)
    ->Range(256, 16384)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK_CAPTURE(BM_FilteredJoin, sim_1d, DsKind::sim_1d)
    ->RangeMultiplier(4)
    ->Range(256, 16384)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK_CAPTURE(BM_FilteredJoin, sim_2d_trees, DsKind::sim_2d_trees)
    ->RangeMultiplier(4)
    ->Range(256, 16384)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK_CAPTURE(BM_FilteredJoin, combination, DsKind::combination)
    ->RangeMultiplier(4)
    ->Range(256, 16384)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK_CAPTURE(BM_FilteredJoin, kd_tree, DsKind::kd_tree)->RangeMultiplier(4)->Range(64, 512);

BENCHMARK(BM_NaiveJoin)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond)->Complexity();

BENCHMARK_CAPTURE(BM_IndexConstruct, linear_scan, DsKind::linear_scan)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexConstruct, sim_1d, DsKind::sim_1d)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexConstruct, sim_2d_trees, DsKind::sim_2d_trees)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexConstruct, combination, DsKind::combination)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexConstruct, kd_tree, DsKind::kd_tree)->Arg(512);

BENCHMARK_CAPTURE(BM_IndexQuery, linear_scan, DsKind::linear_scan)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexQuery, sim_1d, DsKind::sim_1d)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexQuery, sim_2d_trees, DsKind::sim_2d_trees)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexQuery, combination, DsKind::combination)->Arg(4096);
BENCHMARK_CAPTURE(BM_IndexQuery, kd_tree, DsKind::kd_tree)->Arg(512);

BENCHMARK(BM_FullAuction)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
