#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mrvcg/auction.hpp"
#include "mrvcg/rng.hpp"
#include "mrvcg/types.hpp"

namespace mrvcg {

// Per-resource valuation curve shapes. All three start at 0 and are scaled
// so the curve's maximum is 1; the client's tensor is the outer product of
// its curves times max_value.
enum class DatasetKind {
  concave,            // increments sorted descending: strictly increasing, concave
  increasing,         // positive increments: strictly increasing
  mostly_increasing,  // increments may dip below zero; negatives floored at 0
};

const char* dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::increasing;
  int clients = 0;
  std::vector<int> units;  // capacity per resource
  std::uint64_t seed = 0;
  double pareto_index = 1.1;
  std::string cost_csv;  // path to agent_id,cost rows; empty = log-normal costs
};

struct GeneratedClient {
  std::string agent_id;
  double bundle_cost = 0.0;
  double max_value = 0.0;
  std::vector<std::vector<double>> components;  // per resource, length units[r]+1
  ValuationTensor valuation;
};

// One valuation curve over 0..units items of a single resource.
std::vector<double> gen_component(DatasetKind kind, int units, SplitMix64& rng);

// Pareto with shape `pareto_index` and minimum `bundle_cost`: the client
// values the full bundle at least at cost, with a heavy upper tail.
double draw_max_value(double bundle_cost, double pareto_index, SplitMix64& rng);

// Client k draws from child stream k of the spec seed, in the order: cost,
// max_value, then the curves for resource 0, 1, ... A spec that differs only
// in trailing resources therefore reproduces the shared prefix of every
// client exactly. When costs come from a CSV the cost draw is skipped.
std::vector<GeneratedClient> build_dataset(const DatasetSpec& spec);

Bid bid_from_client(const GeneratedClient& client);
std::vector<Bid> bids_from_clients(const std::vector<GeneratedClient>& clients);

// On-disk layout: <dir>/spec.cfg, <dir>/meta.csv (agent_id,bundle_cost,
// max_value), and one <dir>/client_<k>.vft per client.
void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                   const std::vector<GeneratedClient>& clients);

struct LoadedDataset {
  DatasetSpec spec;
  std::vector<GeneratedClient> clients;
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

// CSV with an exact "agent_id,cost" header. Malformed rows are collected and
// reported together, with their line numbers, in a single IoError.
std::vector<std::pair<std::string, double>> read_cost_csv(const std::filesystem::path& path);

}  // namespace mrvcg
