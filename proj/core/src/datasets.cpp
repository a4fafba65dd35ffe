#include "mrvcg/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "mrvcg/errors.hpp"
#include "mrvcg/vft_io.hpp"

namespace mrvcg {

namespace {

constexpr const char* kKindNames[] = {"concave", "increasing", "mostly_increasing"};

std::string client_name(int k) { return "client_" + std::to_string(k); }

void check_spec(const DatasetSpec& spec) {
  require(spec.clients >= 1, "dataset needs at least one client");
  require(!spec.units.empty(), "dataset needs at least one resource");
  for (int m : spec.units) require(m >= 1, "every resource needs at least one unit");
  require(spec.pareto_index > 0.0 && std::isfinite(spec.pareto_index),
          "pareto_index must be positive and finite");
}

ValuationTensor tensor_from_components(const ResourceCapacity& cap, double max_value,
                                       const std::vector<std::vector<double>>& comps) {
  std::vector<double> values(cap.cell_count());
  Allocation a(static_cast<std::size_t>(cap.resources()), 0);
  std::uint32_t cell = 0;
  do {
    double v = max_value;
    for (int r = 0; r < cap.resources(); ++r) v *= comps[static_cast<std::size_t>(r)][static_cast<std::size_t>(a[static_cast<std::size_t>(r)])];
    values[cell++] = v;
  } while (advance_odometer(a, cap));
  return ValuationTensor(cap, std::move(values));
}

// Core generator. When `costs` is set it supplies each client's bundle cost
// and the cost draw is skipped; the remaining draws keep their order
// (max_value first, then the curve of each resource in turn).
std::vector<GeneratedClient> generate_clients(const DatasetSpec& spec,
                                              const std::vector<double>* costs) {
  check_spec(spec);
  const ResourceCapacity cap(spec.units);
  const SplitMix64 master(spec.seed);

  std::vector<GeneratedClient> out;
  out.reserve(static_cast<std::size_t>(spec.clients));
  for (int k = 0; k < spec.clients; ++k) {
    SplitMix64 rng = master.child_stream(static_cast<std::uint64_t>(k));
    GeneratedClient c;
    c.agent_id = client_name(k);
    c.bundle_cost = costs ? (*costs)[static_cast<std::size_t>(k)] : std::exp(rng.next_normal());
    require(c.bundle_cost > 0.0 && std::isfinite(c.bundle_cost),
            "bundle cost must be positive and finite");
    c.max_value = draw_max_value(c.bundle_cost, spec.pareto_index, rng);
    c.components.reserve(spec.units.size());
    for (int m : spec.units) c.components.push_back(gen_component(spec.kind, m, rng));
    c.valuation = tensor_from_components(cap, c.max_value, c.components);
    out.push_back(std::move(c));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double_field(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw IoError("bad " + what + ": '" + text + "'");
  return v;
}

long long parse_int_field(const std::string& text, const std::string& what) {
  long long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw IoError("bad " + what + ": '" + text + "'");
  return v;
}

}  // namespace

const char* dataset_kind_name(DatasetKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

DatasetKind parse_dataset_kind(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kKindNames[i]) return static_cast<DatasetKind>(i);
  }
  throw IoError("unknown dataset kind: '" + name + "'");
}

std::vector<double> gen_component(DatasetKind kind, int units, SplitMix64& rng) {
  require(units >= 1, "component needs at least one unit");
  const std::size_t n = static_cast<std::size_t>(units);
  std::vector<double> inc(n);
  if (kind == DatasetKind::mostly_increasing) {
    for (double& x : inc) x = rng.next_double() * 1.25 - 0.25;
  } else {
    for (double& x : inc) x = rng.next_double_pos();
    if (kind == DatasetKind::concave) std::sort(inc.begin(), inc.end(), std::greater<double>());
  }

  std::vector<double> values(n + 1, 0.0);
  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum += inc[i];
    values[i + 1] = (kind == DatasetKind::mostly_increasing) ? std::max(cum, 0.0) : cum;
  }
  const double peak = *std::max_element(values.begin(), values.end());
  // A curve that never rises above zero stays all-zero: the client simply
  // has no use for this resource.
  if (peak > 0.0) {
    for (double& v : values) v /= peak;
  }
  return values;
}

double draw_max_value(double bundle_cost, double pareto_index, SplitMix64& rng) {
  return bundle_cost * std::pow(rng.next_double_pos(), -1.0 / pareto_index);
}

std::vector<GeneratedClient> build_dataset(const DatasetSpec& spec) {
  if (spec.cost_csv.empty()) return generate_clients(spec, nullptr);

  const auto rows = read_cost_csv(spec.cost_csv);
  std::map<std::string, double> by_id(rows.begin(), rows.end());
  std::vector<double> costs;
  costs.reserve(static_cast<std::size_t>(spec.clients));
  std::string missing;
  for (int k = 0; k < spec.clients; ++k) {
    auto it = by_id.find(client_name(k));
    if (it == by_id.end()) {
      missing += missing.empty() ? client_name(k) : ", " + client_name(k);
    } else {
      costs.push_back(it->second);
    }
  }
  if (!missing.empty()) throw IoError("cost csv is missing agents: " + missing);
  return generate_clients(spec, &costs);
}

Bid bid_from_client(const GeneratedClient& client) {
  return Bid{client.agent_id, client.valuation};
}

std::vector<Bid> bids_from_clients(const std::vector<GeneratedClient>& clients) {
  std::vector<Bid> bids;
  bids.reserve(clients.size());
  for (const GeneratedClient& c : clients) bids.push_back(bid_from_client(c));
  return bids;
}

void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                   const std::vector<GeneratedClient>& clients) {
  check_spec(spec);
  require(static_cast<int>(clients.size()) == spec.clients,
          "client list does not match the spec");
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "spec.cfg", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "spec.cfg").string());
    out << "kind=" << dataset_kind_name(spec.kind) << "\n";
    out << "clients=" << spec.clients << "\n";
    out << "resources=" << spec.units.size() << "\n";
    out << "units=";
    for (std::size_t r = 0; r < spec.units.size(); ++r) {
      if (r) out << ",";
      out << spec.units[r];
    }
    out << "\n";
    out << "seed=" << spec.seed << "\n";
    out << "pareto_index=" << format_double(spec.pareto_index) << "\n";
    out << "cost_source=" << (spec.cost_csv.empty() ? "synthetic" : "csv:" + spec.cost_csv)
        << "\n";
    if (!out) throw IoError("failed writing " + (dir / "spec.cfg").string());
  }

  {
    std::ofstream out(dir / "meta.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "meta.csv").string());
    out << "agent_id,bundle_cost,max_value\n";
    for (const GeneratedClient& c : clients) {
      out << c.agent_id << "," << format_double(c.bundle_cost) << ","
          << format_double(c.max_value) << "\n";
    }
    if (!out) throw IoError("failed writing " + (dir / "meta.csv").string());
  }

  for (std::size_t k = 0; k < clients.size(); ++k) {
    write_vft(dir / (client_name(static_cast<int>(k)) + ".vft"), clients[k].valuation);
  }
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  LoadedDataset out;

  {
    std::istringstream in(read_text_file(dir / "spec.cfg"));
    std::map<std::string, std::string> fields;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw IoError("spec.cfg line " + std::to_string(lineno) + ": expected key=value");
      }
      fields[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const char* needed[] = {"kind", "clients", "resources", "units",
                            "seed", "pareto_index", "cost_source"};
    for (const char* key : needed) {
      if (!fields.count(key)) throw IoError(std::string("spec.cfg is missing ") + key);
    }
    if (fields.size() != 7) throw IoError("spec.cfg has unknown keys");

    DatasetSpec& spec = out.spec;
    spec.kind = parse_dataset_kind(fields["kind"]);
    spec.clients = static_cast<int>(parse_int_field(fields["clients"], "clients"));
    const long long resources = parse_int_field(fields["resources"], "resources");
    std::istringstream units_in(fields["units"]);
    std::string piece;
    while (std::getline(units_in, piece, ',')) {
      spec.units.push_back(static_cast<int>(parse_int_field(piece, "units entry")));
    }
    if (static_cast<long long>(spec.units.size()) != resources) {
      throw IoError("spec.cfg units list does not match resources");
    }
    spec.seed = static_cast<std::uint64_t>(parse_int_field(fields["seed"], "seed"));
    spec.pareto_index = parse_double_field(fields["pareto_index"], "pareto_index");
    const std::string& source = fields["cost_source"];
    if (source == "synthetic") {
      spec.cost_csv.clear();
    } else if (source.rfind("csv:", 0) == 0) {
      spec.cost_csv = source.substr(4);
    } else {
      throw IoError("spec.cfg has bad cost_source: '" + source + "'");
    }
  }

  // meta.csv holds the costs, so a dataset that was built from a cost file
  // stays loadable after that file is gone.
  std::vector<double> costs;
  std::vector<double> max_values;
  {
    std::istringstream in(read_text_file(dir / "meta.csv"));
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "agent_id,bundle_cost,max_value") {
      throw IoError("meta.csv must start with 'agent_id,bundle_cost,max_value'");
    }
    int k = 0;
    while (std::getline(in, line)) {
      line = strip_cr(line);
      if (line.empty()) continue;
      const std::size_t c1 = line.find(',');
      const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : line.find(',', c1 + 1);
      if (c2 == std::string::npos) throw IoError("meta.csv: bad row '" + line + "'");
      if (line.substr(0, c1) != client_name(k)) {
        throw IoError("meta.csv: expected " + client_name(k) + ", got '" + line.substr(0, c1) + "'");
      }
      costs.push_back(parse_double_field(line.substr(c1 + 1, c2 - c1 - 1), "bundle_cost"));
      max_values.push_back(parse_double_field(line.substr(c2 + 1), "max_value"));
      ++k;
    }
    if (k != out.spec.clients) throw IoError("meta.csv row count does not match spec.cfg");
  }

  // Regenerate from the recorded spec and check the artifacts against it.
  // The value files use shortest round-trip formatting, so agreement is
  // bit-exact, and any hand-edited or mixed-up file is caught here.
  const bool synthetic = out.spec.cost_csv.empty();
  out.clients = generate_clients(out.spec, synthetic ? nullptr : &costs);
  for (int k = 0; k < out.spec.clients; ++k) {
    const GeneratedClient& c = out.clients[static_cast<std::size_t>(k)];
    if (c.bundle_cost != costs[static_cast<std::size_t>(k)] ||
        c.max_value != max_values[static_cast<std::size_t>(k)]) {
      throw IoError("meta.csv does not match the spec for " + c.agent_id);
    }
    const ValuationTensor on_disk = read_vft(dir / (client_name(k) + ".vft"));
    bool same = on_disk.capacity().units() == c.valuation.capacity().units();
    if (same) {
      for (std::uint32_t cell = 0; cell < on_disk.capacity().cell_count(); ++cell) {
        if (on_disk.value(cell) != c.valuation.value(cell)) {
          same = false;
          break;
        }
      }
    }
    if (!same) throw IoError(client_name(k) + ".vft does not match the dataset spec");
  }
  return out;
}

std::vector<std::pair<std::string, double>> read_cost_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "agent_id,cost") {
    throw IoError(path.string() + " must start with header 'agent_id,cost'");
  }

  std::vector<std::pair<std::string, double>> rows;
  std::vector<std::string> bad;
  std::map<std::string, int> first_seen;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    std::string why;
    if (comma == std::string::npos) {
      why = "expected 'agent_id,cost'";
    } else if (comma == 0) {
      why = "empty agent_id";
    } else {
      const std::string id = line.substr(0, comma);
      const std::string text = line.substr(comma + 1);
      double cost = 0.0;
      const char* first = text.data();
      const char* last = first + text.size();
      auto [ptr, ec] = std::from_chars(first, last, cost);
      if (ec != std::errc{} || ptr != last) {
        why = "bad cost '" + text + "'";
      } else if (!(cost > 0.0) || !std::isfinite(cost)) {
        why = "cost must be positive and finite";
      } else if (!first_seen.emplace(id, lineno).second) {
        why = "duplicate agent_id (first at line " + std::to_string(first_seen[id]) + ")";
      } else {
        rows.emplace_back(id, cost);
      }
    }
    if (!why.empty()) bad.push_back("line " + std::to_string(lineno) + ": " + why);
  }
  if (!bad.empty()) {
    std::string msg = path.string() + " has " + std::to_string(bad.size()) + " bad row(s)";
    for (const std::string& b : bad) msg += "\n  " + b;
    throw IoError(msg);
  }
  return rows;
}

}  // namespace mrvcg
