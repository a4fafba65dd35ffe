#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "mrvcg/datasets.hpp"
#include "mrvcg/vft_io.hpp"

using namespace mrvcg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("mrvcg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  FAIL("expected an exception");
  return "";
}

bool same_clients(const std::vector<GeneratedClient>& a, const std::vector<GeneratedClient>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].agent_id != b[k].agent_id) return false;
    if (a[k].bundle_cost != b[k].bundle_cost) return false;
    if (a[k].max_value != b[k].max_value) return false;
    if (a[k].components != b[k].components) return false;
    if (a[k].valuation.values() != b[k].valuation.values()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("kind names round-trip and reject junk") {
  for (DatasetKind kind : {DatasetKind::concave, DatasetKind::increasing,
                           DatasetKind::mostly_increasing}) {
    CHECK(parse_dataset_kind(dataset_kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_dataset_kind("cromulent"), IoError);
}

TEST_CASE("component curves have the advertised shape") {
  SplitMix64 rng(777);
  SUBCASE("concave: strictly increasing with non-increasing gains, peak 1") {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c = gen_component(DatasetKind::concave, 9, rng);
      REQUIRE(c.size() == 10);
      CHECK(c[0] == 0.0);
      CHECK(c.back() == 1.0);
      double prev_gain = kUnbounded;
      for (std::size_t u = 1; u < c.size(); ++u) {
        const double gain = c[u] - c[u - 1];
        CHECK(gain > 0.0);
        CHECK(gain <= prev_gain + 1e-12);
        prev_gain = gain;
      }
    }
  }
  SUBCASE("increasing: strictly increasing, peak 1") {
    bool convex_step_seen = false;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c = gen_component(DatasetKind::increasing, 9, rng);
      CHECK(c[0] == 0.0);
      CHECK(c.back() == 1.0);
      for (std::size_t u = 1; u < c.size(); ++u) CHECK(c[u] > c[u - 1]);
      for (std::size_t u = 2; u < c.size(); ++u) {
        if (c[u] - c[u - 1] > c[u - 1] - c[u - 2]) convex_step_seen = true;
      }
    }
    CHECK(convex_step_seen);  // unsorted increments do produce rising gains
  }
  SUBCASE("mostly increasing: bounded to [0, 1], dips happen") {
    bool dip_seen = false;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c = gen_component(DatasetKind::mostly_increasing, 9, rng);
      CHECK(c[0] == 0.0);
      for (double v : c) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      CHECK(*std::max_element(c.begin(), c.end()) == 1.0);
      for (std::size_t u = 1; u < c.size(); ++u) {
        if (c[u] < c[u - 1]) dip_seen = true;
      }
    }
    CHECK(dip_seen);
  }
}

TEST_CASE("max value sits on or above the bundle cost") {
  SplitMix64 rng(778);
  for (int trial = 0; trial < 200; ++trial) {
    const double cost = 0.5 + rng.next_double() * 10.0;
    CHECK(draw_max_value(cost, 1.1, rng) >= cost);
  }
}

TEST_CASE("dataset generation is deterministic") {
  DatasetSpec spec;
  spec.kind = DatasetKind::increasing;
  spec.clients = 4;
  spec.units = {3, 5};
  spec.seed = 99;
  CHECK(same_clients(build_dataset(spec), build_dataset(spec)));
}

TEST_CASE("adding a resource keeps every earlier draw of every client") {
  DatasetSpec narrow;
  narrow.kind = DatasetKind::concave;
  narrow.clients = 5;
  narrow.units = {4};
  narrow.seed = 31337;
  DatasetSpec wide = narrow;
  wide.units = {4, 6};

  std::vector<GeneratedClient> a = build_dataset(narrow);
  std::vector<GeneratedClient> b = build_dataset(wide);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].bundle_cost == b[k].bundle_cost);
    CHECK(a[k].max_value == b[k].max_value);
    CHECK(a[k].components[0] == b[k].components[0]);
  }
}

TEST_CASE("client tensors are the scaled product of their curves") {
  DatasetSpec spec;
  spec.kind = DatasetKind::mostly_increasing;
  spec.clients = 3;
  spec.units = {3, 4};
  spec.seed = 5;
  ResourceCapacity cap(spec.units);
  for (const GeneratedClient& c : build_dataset(spec)) {
    CHECK(c.valuation.value(std::size_t{0}) == 0.0);
    Allocation a(2, 0);
    do {
      double expected = c.max_value;
      for (int r = 0; r < 2; ++r) {
        expected *= c.components[static_cast<std::size_t>(r)][static_cast<std::size_t>(a[static_cast<std::size_t>(r)])];
      }
      CHECK(c.valuation.value(a) == expected);
    } while (advance_odometer(a, cap));
  }
}

TEST_CASE("dataset write and load round-trip, with tamper detection") {
  DatasetSpec spec;
  spec.kind = DatasetKind::increasing;
  spec.clients = 3;
  spec.units = {4, 3};
  spec.seed = 12345;
  std::vector<GeneratedClient> clients = build_dataset(spec);

  SUBCASE("round trip") {
    fs::path dir = fresh_dir("roundtrip");
    write_dataset(dir, spec, clients);
    LoadedDataset loaded = load_dataset(dir);
    CHECK(loaded.spec.kind == spec.kind);
    CHECK(loaded.spec.clients == spec.clients);
    CHECK(loaded.spec.units == spec.units);
    CHECK(loaded.spec.seed == spec.seed);
    CHECK(loaded.spec.pareto_index == spec.pareto_index);
    CHECK(same_clients(loaded.clients, clients));
    fs::remove_all(dir);
  }
  SUBCASE("edited meta.csv is rejected") {
    fs::path dir = fresh_dir("tamper_meta");
    write_dataset(dir, spec, clients);
    std::string meta = read_text(dir / "meta.csv");
    const std::size_t comma = meta.find(',', meta.find("client_0"));
    meta.insert(comma + 1, "9");  // prepending a digit always changes the cost
    write_text(dir / "meta.csv", meta);
    CHECK_THROWS_AS(load_dataset(dir), IoError);
    fs::remove_all(dir);
  }
  SUBCASE("edited value file is rejected") {
    fs::path dir = fresh_dir("tamper_vft");
    write_dataset(dir, spec, clients);
    std::vector<double> values = clients[1].valuation.values();
    values.back() *= 2.0;
    write_vft(dir / "client_1.vft", ValuationTensor(ResourceCapacity(spec.units), values));
    const std::string msg = thrown_message([&] { load_dataset(dir); });
    CHECK(msg.find("client_1.vft") != std::string::npos);
    fs::remove_all(dir);
  }
  SUBCASE("unknown spec keys are rejected") {
    fs::path dir = fresh_dir("tamper_spec");
    write_dataset(dir, spec, clients);
    write_text(dir / "spec.cfg", read_text(dir / "spec.cfg") + "surprise=1\n");
    CHECK_THROWS_AS(load_dataset(dir), IoError);
    fs::remove_all(dir);
  }
}

TEST_CASE("costs can come from a csv file") {
  fs::path dir = fresh_dir("cost_csv");
  const fs::path csv = dir / "costs.csv";

  SUBCASE("well-formed file drives the costs") {
    write_text(csv, "agent_id,cost\nclient_0,2.5\nclient_1,0.125\nclient_2,7\n");
    DatasetSpec spec;
    spec.kind = DatasetKind::concave;
    spec.clients = 3;
    spec.units = {4};
    spec.seed = 777;
    spec.cost_csv = csv.string();
    std::vector<GeneratedClient> clients = build_dataset(spec);
    CHECK(clients[0].bundle_cost == 2.5);
    CHECK(clients[1].bundle_cost == 0.125);
    CHECK(clients[2].bundle_cost == 7.0);
    for (const GeneratedClient& c : clients) CHECK(c.max_value >= c.bundle_cost);

    // A dataset built from a cost file reloads even after the file is gone.
    fs::path ds_dir = fresh_dir("cost_csv_ds");
    write_dataset(ds_dir, spec, clients);
    fs::remove(csv);
    LoadedDataset loaded = load_dataset(ds_dir);
    CHECK(same_clients(loaded.clients, clients));
    fs::remove_all(ds_dir);
  }
  SUBCASE("missing client is reported by name") {
    write_text(csv, "agent_id,cost\nclient_0,1\nclient_2,1\n");
    DatasetSpec spec;
    spec.kind = DatasetKind::concave;
    spec.clients = 3;
    spec.units = {4};
    spec.cost_csv = csv.string();
    const std::string msg = thrown_message([&] { build_dataset(spec); });
    CHECK(msg.find("client_1") != std::string::npos);
  }
  SUBCASE("bad rows are all reported with line numbers") {
    write_text(csv,
               "agent_id,cost\n"
               "client_0,1.5\n"
               "client_1,banana\n"
               "client_2,-3\n"
               "client_0,2.0\n");
    const std::string msg = thrown_message([&] { read_cost_csv(csv); });
    CHECK(msg.find("3 bad row(s)") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
  }
  SUBCASE("wrong header is rejected") {
    write_text(csv, "id,price\nclient_0,1\n");
    CHECK_THROWS_AS(read_cost_csv(csv), IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("spec validation") {
  DatasetSpec spec;
  spec.kind = DatasetKind::increasing;
  spec.clients = 1;
  spec.units = {2};
  SUBCASE("zero clients") {
    spec.clients = 0;
    CHECK_THROWS_AS(build_dataset(spec), ContractViolation);
  }
  SUBCASE("no resources") {
    spec.units.clear();
    CHECK_THROWS_AS(build_dataset(spec), ContractViolation);
  }
  SUBCASE("zero units") {
    spec.units = {0};
    CHECK_THROWS_AS(build_dataset(spec), ContractViolation);
  }
  SUBCASE("bad pareto index") {
    spec.pareto_index = 0.0;
    CHECK_THROWS_AS(build_dataset(spec), ContractViolation);
  }
}
