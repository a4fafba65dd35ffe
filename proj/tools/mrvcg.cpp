#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mrvcg/auction.hpp"
#include "mrvcg/baselines.hpp"
#include "mrvcg/datasets.hpp"
#include "mrvcg/join.hpp"
#include "mrvcg/types.hpp"
#include "mrvcg/ubds.hpp"
#include "mrvcg/verify.hpp"
#include "mrvcg/vft_io.hpp"

namespace fs = std::filesystem;
using namespace mrvcg;

namespace {

// Bad flag values caught after CLI11 parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_units_list(const std::string& text, int resources) {
  std::vector<int> units;
  std::istringstream in(text);
  std::string piece;
  while (std::getline(in, piece, ',')) {
    int value = 0;
    const char* first = piece.data();
    const char* last = first + piece.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw UsageError("--units: '" + piece + "' is not an integer");
    if (value < 1) throw UsageError("--units: every resource needs at least one unit");
    units.push_back(value);
  }
  if (units.empty()) throw UsageError("--units: empty list");
  if (static_cast<int>(units.size()) == 1 && resources > 1) {
    units.assign(static_cast<std::size_t>(resources), units[0]);
  }
  if (static_cast<int>(units.size()) != resources) {
    throw UsageError("--units lists " + std::to_string(units.size()) + " resources, --resources says " +
                     std::to_string(resources));
  }
  return units;
}

std::string units_tag(const std::vector<int>& units) {
  std::string tag;
  for (std::size_t r = 0; r < units.size(); ++r) {
    if (r) tag += 'x';
    tag += std::to_string(units[r]);
  }
  return tag;
}

std::string alloc_tag(const Allocation& a) {
  std::string tag;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (r) tag += 'x';
    tag += std::to_string(a[r]);
  }
  return tag;
}

// Table rendering only; csv output keeps full round-trip precision.
std::string pretty(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string dataset_id(const DatasetSpec& spec) {
  return std::string(dataset_kind_name(spec.kind)) + "_r" + std::to_string(spec.units.size()) +
         "_u" + units_tag(spec.units) + "_n" + std::to_string(spec.clients) + "_s" +
         std::to_string(spec.seed);
}

using Clock = std::chrono::steady_clock;

template <class F>
std::uint64_t time_ns(F&& fn) {
  const auto t0 = Clock::now();
  fn();
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

template <class F>
std::uint64_t median_time_ns(int reps, F&& fn) {
  std::vector<std::uint64_t> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) samples.push_back(time_ns(fn));
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return (samples[(n - 1) / 2] + samples[n / 2]) / 2;
}

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << header << "\n";
  return out;
}

std::vector<std::string> dataset_kind_names() {
  return {dataset_kind_name(DatasetKind::concave), dataset_kind_name(DatasetKind::increasing),
          dataset_kind_name(DatasetKind::mostly_increasing)};
}

std::vector<std::string> index_kind_names() {
  std::vector<std::string> names;
  for (DsKind kind : all_ds_kinds()) names.emplace_back(ds_kind_name(kind));
  return names;
}

bool kd_fits(DsKind kind, const ResourceCapacity& cap) {
  if (kind != DsKind::kd_tree) return true;
  return cap.cell_count() <= 1024 && 3 * cap.resources() <= 6;
}

// ---------------------------------------------------------------- gen ----

struct GenOpts {
  std::string kind = "increasing";
  int clients = 16;
  int resources = 1;
  std::string units = "15";
  std::uint64_t seed = 0;
  double pareto_index = 1.1;
  std::string cost_csv;
  std::string out;
};

int cmd_gen(const GenOpts& o) {
  DatasetSpec spec;
  spec.kind = parse_dataset_kind(o.kind);
  spec.clients = o.clients;
  spec.units = parse_units_list(o.units, o.resources);
  spec.seed = o.seed;
  spec.pareto_index = o.pareto_index;
  spec.cost_csv = o.cost_csv;

  const std::vector<GeneratedClient> clients = build_dataset(spec);
  write_dataset(o.out, spec, clients);
  std::cout << "wrote " << clients.size() << " clients to " << o.out << " (kind="
            << dataset_kind_name(spec.kind) << ", units=" << units_tag(spec.units)
            << ", seed=" << spec.seed << ")\n";
  return 0;
}

// ------------------------------------------------------------ auction ----

struct AuctionOpts {
  std::string dir;
  std::string ds_kind = "combination";
  bool oracle = false;
  bool verify_baseline = false;
  std::string csv;
};

std::vector<Bid> load_bids(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  if (fs::exists(dir / "spec.cfg")) {
    return bids_from_clients(load_dataset(dir).clients);
  }
  // A bare directory of .vft files is accepted too; the file stem names the
  // agent and the sort order fixes the bid order.
  std::vector<fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".vft") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no spec.cfg and no .vft files in " + dir.string());
  std::vector<Bid> bids;
  bids.reserve(files.size());
  for (const fs::path& f : files) bids.push_back({f.stem().string(), read_vft(f)});
  return bids;
}

int cmd_auction(const AuctionOpts& o) {
  const std::vector<Bid> bids = load_bids(o.dir);
  const ResourceCapacity cap = bids.front().valuation.capacity();

  JoinOptions options;
  options.ds_kind = *parse_ds_kind(o.ds_kind);

  AuctionResult res;
  const std::uint64_t total_ns = time_ns([&] { res = run_vcg_auction(bids, cap, options); });

  std::size_t id_width = 5;
  for (const std::string& id : res.agent_ids) id_width = std::max(id_width, id.size());
  std::cout << std::left << std::setw(static_cast<int>(id_width) + 2) << "agent" << std::setw(14)
            << "allocation" << std::setw(16) << "value" << std::setw(16) << "payment"
            << "winner\n";
  for (std::size_t j = 0; j < bids.size(); ++j) {
    std::cout << std::setw(static_cast<int>(id_width) + 2) << res.agent_ids[j] << std::setw(14)
              << alloc_tag(res.allocations[j]) << std::setw(16) << pretty(res.values[j])
              << std::setw(16) << pretty(res.payments[j]) << (res.winner[j] ? "yes" : "no")
              << "\n";
  }
  std::cout << "social welfare " << format_double(res.social_welfare) << "\n";
  std::cout << "solved " << bids.size() << " bids over " << cap.cell_count() << " cells in "
            << pretty(static_cast<double>(total_ns) / 1e6) << " ms (ds_kind "
            << ds_kind_name(options.ds_kind) << ")\n";

  bool failed = false;
  if (o.oracle) {
    // Exhaustive reference: every intermediate joint recomputed cell by
    // cell. Only sensible on small grids; the help text says so.
    const double tol = 1e-9 * std::max(1.0, std::abs(res.social_welfare));
    const double oracle_sw = verify::oracle_social_welfare(bids, cap);
    if (std::abs(res.social_welfare - oracle_sw) > tol) {
      std::cout << "ORACLE MISMATCH: social welfare " << format_double(res.social_welfare)
                << " vs exhaustive " << format_double(oracle_sw) << "\n";
      failed = true;
    }
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (!res.winner[j]) continue;
      const double wo = verify::oracle_welfare_without(bids, cap, j);
      const double expected = wo - (res.social_welfare - res.values[j]);
      if (std::abs(res.payments[j] - expected) > 1e-9 * std::max(1.0, std::abs(wo))) {
        std::cout << "ORACLE MISMATCH: payment of " << res.agent_ids[j] << " is "
                  << format_double(res.payments[j]) << ", exhaustive expects "
                  << format_double(expected) << "\n";
        failed = true;
      }
    }
    if (!failed) std::cout << "oracle agreement: welfare and payments within 1e-9\n";
  }

  if (o.verify_baseline) {
    if (cap.resources() != 1) throw UsageError("--verify-baseline needs a 1-resource dataset");
    std::vector<SingleResourceBid> curve_bids;
    curve_bids.reserve(bids.size());
    for (const Bid& b : bids) curve_bids.push_back({b.agent_id, b.valuation.values()});
    const ConcaveAuctionResult base = concave_auction(curve_bids, cap.units(0));
    const double tol = 1e-9 * std::max(1.0, std::abs(base.social_welfare));
    if (std::abs(res.social_welfare - base.social_welfare) > tol) {
      std::cout << "BASELINE MISMATCH: welfare " << format_double(res.social_welfare) << " vs greedy "
                << format_double(base.social_welfare) << "\n";
      failed = true;
    }
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (std::abs(res.payments[j] - base.payments[j]) > tol) {
        std::cout << "BASELINE MISMATCH: payment of " << res.agent_ids[j] << " is "
                  << format_double(res.payments[j]) << " vs greedy "
                  << format_double(base.payments[j]) << "\n";
        failed = true;
      }
    }
    if (!failed) std::cout << "baseline agreement: greedy auction matches within 1e-9\n";
  }

  if (!o.csv.empty()) {
    std::ofstream out = open_csv(o.csv, "agent_id,allocation,value,payment,winner");
    for (std::size_t j = 0; j < bids.size(); ++j) {
      out << res.agent_ids[j] << ',' << alloc_tag(res.allocations[j]) << ','
          << format_double(res.values[j]) << ',' << format_double(res.payments[j]) << ','
          << (res.winner[j] ? 1 : 0) << "\n";
    }
    std::cout << "wrote " << o.csv << "\n";
  }
  return failed ? 1 : 0;
}

// -------------------------------------------------------------- bench ----

struct BenchOpts {
  std::string out;
  std::string kind = "increasing";
  int clients = 2;
  int resources = 1;
  std::vector<std::string> units;  // one sweep point per occurrence
  std::uint64_t seed = 1;
  int reps = 5;
  std::vector<std::string> ds_kinds;  // empty = all
  bool naive = false;
  bool auctions = false;
  bool separate = false;
  double pareto_index = 1.1;
};

void write_run_info(const fs::path& path) {
  std::ofstream out = open_csv(path, "key,value");
  out << "tool,mrvcg\n";
#ifdef __VERSION__
  out << "compiler," << __VERSION__ << "\n";
#else
  out << "compiler,unknown\n";
#endif
  out << "hardware_threads," << std::thread::hardware_concurrency() << "\n";
  out << "clock,steady_clock\n";
  out << "timing,median_of_repetitions\n";
  const std::time_t now = std::time(nullptr);
  char stamp[32] = "unknown";
  if (std::tm* tm = std::gmtime(&now)) std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", tm);
  out << "timestamp_utc," << stamp << "\n";
}

int cmd_bench(const BenchOpts& o) {
  if (o.clients < 2) throw UsageError("--clients must be at least 2, a join needs two operands");
  const DatasetKind kind = parse_dataset_kind(o.kind);
  if (o.separate && kind != DatasetKind::concave) {
    throw UsageError("--separate needs --kind concave, per-resource auctions require concave curves");
  }
  std::vector<std::string> sweep = o.units;
  if (sweep.empty()) sweep = {"255", "511", "1023", "2047"};
  std::vector<DsKind> kinds;
  if (o.ds_kinds.empty()) {
    kinds = all_ds_kinds();
  } else {
    for (const std::string& name : o.ds_kinds) kinds.push_back(*parse_ds_kind(name));
  }

  fs::create_directories(o.out);
  const fs::path dir(o.out);
  write_run_info(dir / "run_info.csv");

  const std::string tag_cols = "dataset,seed,resources,units,cells,clients,ds_kind";
  std::ofstream joins = open_csv(dir / "joins.csv",
                                 tag_cols +
                                     ",reps,median_join_ns,queries,candidates,matches,comparisons,"
                                     "false_positive_ratio,construct_ns,query_ns,fetch_ns,compare_ns");
  std::ofstream naive;
  if (o.naive) {
    naive = open_csv(dir / "naive.csv", tag_cols + ",reps,median_join_ns,comparisons,closed_form");
  }
  std::ofstream auctions;
  if (o.auctions) {
    auctions = open_csv(dir / "auctions.csv", tag_cols + ",reps,median_auction_ns,social_welfare");
  }
  std::ofstream separate;
  if (o.separate) {
    separate = open_csv(dir / "separate.csv", tag_cols + ",optimal,achieved,ratio");
  }

  for (const std::string& point : sweep) {
    DatasetSpec spec;
    spec.kind = kind;
    spec.clients = o.clients;
    spec.units = parse_units_list(point, o.resources);
    spec.seed = o.seed;
    spec.pareto_index = o.pareto_index;
    const std::vector<GeneratedClient> clients = build_dataset(spec);
    const ResourceCapacity cap(spec.units);
    const std::string id = dataset_id(spec);

    auto tag = [&](std::ostream& out, DsKind ds) -> std::ostream& {
      out << id << ',' << spec.seed << ',' << cap.resources() << ',' << units_tag(spec.units) << ','
          << cap.cell_count() << ',' << spec.clients << ',' << ds_kind_name(ds);
      return out;
    };

    const ValuationTensor& a = clients[0].valuation;
    const ValuationTensor& b = clients[1].valuation;

    for (DsKind ds : kinds) {
      if (!kd_fits(ds, cap)) {
        std::cout << "skipping kd_tree at " << units_tag(spec.units)
                  << " (beyond its size limits)\n";
        continue;
      }
      JoinOptions options;
      options.ds_kind = ds;
      JoinResult last;
      const std::uint64_t median_ns =
          median_time_ns(o.reps, [&] { last = join_with_metrics(a, b, options); });
      const JoinMetrics& m = last.metrics;
      tag(joins, ds) << ',' << o.reps << ',' << median_ns << ',' << m.queries_issued << ','
                     << m.candidates_fetched << ',' << m.exact_matches << ',' << m.comparisons_made
                     << ',' << format_double(m.false_positive_ratio()) << ','
                     << m.phase_ns.construct_ns << ',' << m.phase_ns.query_ns << ','
                     << m.phase_ns.fetch_ns << ',' << m.phase_ns.compare_ns << "\n";

      if (o.auctions) {
        AuctionResult res;
        const std::uint64_t auction_ns =
            median_time_ns(o.reps, [&] { res = run_vcg_auction(bids_from_clients(clients), cap, options); });
        tag(auctions, ds) << ',' << o.reps << ',' << auction_ns << ','
                          << format_double(res.social_welfare) << "\n";
      }
    }

    if (o.naive) {
      NaiveJoinResult res;
      const std::uint64_t median_ns = median_time_ns(o.reps, [&] { res = naive_join(a, b); });
      tag(naive, DsKind::linear_scan) << ',' << o.reps << ',' << median_ns << ',' << res.comparisons
                                      << ',' << naive_comparison_closed_form(cap) << "\n";
    }

    if (o.separate) {
      const SeparateAuctionsResult res = separate_auctions(clients);
      tag(separate, DsKind::combination)
          << ',' << format_double(res.optimal_welfare) << ',' << format_double(res.achieved_welfare)
          << ',' << format_double(res.ratio) << "\n";
    }
    std::cout << "benched " << id << "\n";
  }
  std::cout << "wrote CSVs to " << o.out << "\n";
  return 0;
}

// ------------------------------------------------------------- verify ----

struct VerifyOpts {
  std::vector<std::string> suites;
  std::uint64_t seed = 1;
  bool quick = false;
  bool inject_fault = false;
};

int cmd_verify(const VerifyOpts& o, const std::string& argv0) {
  verify::SuiteConfig config;
  config.seed = o.seed;
  config.quick = o.quick;
  config.fault = o.inject_fault ? FaultInjection::pareto_boundary_as_zero : FaultInjection::none;

  const std::vector<std::string> names = o.suites.empty() ? verify::suite_names() : o.suites;
  bool any_failed = false;
  for (const std::string& name : names) {
    const verify::SuiteReport report = verify::run_suite(name, config);
    if (report.passed()) {
      std::cout << "suite " << report.name << ": PASS (" << report.trials << " trials)\n";
      continue;
    }
    any_failed = true;
    std::cout << "suite " << report.name << ": FAIL (" << report.trials << " trials, "
              << report.failures.size() << " failures)\n";
    for (const std::string& failure : report.failures) std::cout << "  " << failure << "\n";
    std::cout << "reproduce: " << argv0 << " verify --suite " << report.name << " --seed " << o.seed
              << (o.quick ? " --quick" : "") << (o.inject_fault ? " --inject-fault" : "") << "\n";
  }
  return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact multi-unit, multi-resource auctions: dataset generation, solving,\n"
      "benchmarking and randomized self-verification."};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file (same keys as the flags)");

  GenOpts g;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset directory");
  gen->add_option("--kind", g.kind, "Valuation curve family")
      ->check(CLI::IsMember(dataset_kind_names()));
  gen->add_option("--clients", g.clients, "Number of clients")->check(CLI::Range(1, 1000000));
  gen->add_option("--resources", g.resources, "Number of resources")->check(CLI::Range(1, 16));
  gen->add_option("--units", g.units,
                  "Units per resource, comma separated; one value is used for every resource");
  gen->add_option("--seed", g.seed, "Master seed");
  gen->add_option("--pareto-index", g.pareto_index, "Tail shape of the max-value distribution");
  gen->add_option("--cost-csv", g.cost_csv, "Bundle costs from a csv (header agent_id,cost)");
  gen->add_option("--out", g.out, "Output directory")->required();

  AuctionOpts a;
  CLI::App* auction = app.add_subcommand(
      "auction", "Run one auction over a dataset directory (or a directory of .vft files)");
  auction->add_option("dir", a.dir, "Dataset directory")->required();
  auction->add_option("--ds-kind", a.ds_kind, "Index used inside joins")
      ->check(CLI::IsMember(index_kind_names()));
  auction->add_flag("--oracle", a.oracle,
                    "Recompute welfare and payments exhaustively and assert agreement "
                    "(small grids only)");
  auction->add_flag("--verify-baseline", a.verify_baseline,
                    "Check against the greedy auction (1 resource, concave bids)");
  auction->add_option("--csv", a.csv, "Also write the result table to this csv file");

  BenchOpts b;
  CLI::App* bench = app.add_subcommand("bench", "Measure joins, auctions and baselines into CSVs");
  bench->add_option("--out", b.out, "Directory for the csv files")->required();
  bench->add_option("--kind", b.kind, "Valuation curve family")
      ->check(CLI::IsMember(dataset_kind_names()));
  bench->add_option("--clients", b.clients, "Clients per dataset")->check(CLI::Range(2, 100000));
  bench->add_option("--resources", b.resources, "Number of resources")->check(CLI::Range(1, 16));
  bench->add_option("--units", b.units,
                    "Sweep point (units per resource, comma separated); repeat for more points");
  bench->add_option("--seed", b.seed, "Master seed");
  bench->add_option("--reps", b.reps, "Repetitions per measurement (median is reported)")
      ->check(CLI::Range(1, 1000));
  bench->add_option("--ds-kind", b.ds_kinds, "Index kinds to bench; repeat for more, default all")
      ->check(CLI::IsMember(index_kind_names()));
  bench->add_flag("--naive", b.naive, "Also time the exhaustive join and record its counter");
  bench->add_flag("--auctions", b.auctions, "Also time full auctions over every client");
  bench->add_flag("--separate", b.separate,
                  "Also run per-resource auctions and record the welfare ratio (concave only)");
  bench->add_option("--pareto-index", b.pareto_index, "Tail shape of the max-value distribution");

  VerifyOpts v;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Run the randomized verification suites against the solver");
  verify_cmd->add_option("--suite", v.suites, "Suites to run; repeat for more, default all")
      ->check(CLI::IsMember(verify::suite_names()));
  verify_cmd->add_option("--seed", v.seed, "Master seed for instance generation");
  verify_cmd->add_flag("--quick", v.quick, "Fewer and smaller trials");
  verify_cmd->add_flag("--inject-fault", v.inject_fault,
                       "Run with a deliberately broken filter; the suites must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(g);
    if (*auction) return cmd_auction(a);
    if (*bench) return cmd_bench(b);
    if (*verify_cmd) return cmd_verify(v, argv[0]);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
