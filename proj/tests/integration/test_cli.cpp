#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mrvcg/types.hpp"
#include "mrvcg/vft_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_tool;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_tool(const std::string& args) {
  const std::string cmd = "\"" + g_tool + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) res.output.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("mrvcg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<std::string> line_tokens(const std::string& output, const std::string& first_token) {
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream words(line);
    std::vector<std::string> tokens;
    std::string w;
    while (words >> w) tokens.push_back(w);
    if (!tokens.empty() && tokens[0] == first_token) return tokens;
  }
  return {};
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string piece;
  while (std::getline(in, piece, ',')) fields.push_back(piece);
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::istringstream in(read_bytes(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(split_csv_row(line));
  }
  return rows;
}

}  // namespace

TEST_CASE("gen writes a dataset and reruns byte-identically") {
  fs::path d1 = fresh_dir("gen1");
  fs::path d2 = fresh_dir("gen2");
  const std::string flags = "--kind increasing --clients 6 --resources 2 --units 3,4 --seed 42";
  RunResult r1 = run_tool("gen " + flags + " --out " + d1.string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("wrote 6 clients") != std::string::npos);
  RunResult r2 = run_tool("gen " + flags + " --out " + d2.string());
  REQUIRE(r2.exit_code == 0);

  for (const char* name : {"spec.cfg", "meta.csv", "client_0.vft", "client_5.vft"}) {
    CHECK(read_bytes(d1 / name) == read_bytes(d2 / name));
  }
  int vft_files = 0;
  for (const fs::directory_entry& e : fs::directory_iterator(d1)) {
    if (e.path().extension() == ".vft") ++vft_files;
  }
  CHECK(vft_files == 6);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_tool("gen --clients 4 --units 0 --out /tmp/mrvcg_cli_unused").exit_code == 2);
  CHECK(run_tool("gen --kind sideways --out /tmp/mrvcg_cli_unused").exit_code == 2);
  CHECK(run_tool("").exit_code == 2);                       // missing subcommand
  CHECK(run_tool("verify --suite bogus").exit_code == 2);   // unknown suite
  CHECK(run_tool("auction /no/such/dir").exit_code == 2);   // not a directory
}

TEST_CASE("two-bid fixture prints the displaced value as the payment") {
  fs::path dir = fresh_dir("vickrey");
  mrvcg::ResourceCapacity cap({1});
  mrvcg::write_vft(dir / "a.vft", mrvcg::ValuationTensor(cap, {0.0, 5.0}));
  mrvcg::write_vft(dir / "b.vft", mrvcg::ValuationTensor(cap, {0.0, 3.0}));

  RunResult r = run_tool("auction " + dir.string());
  CHECK(r.exit_code == 0);
  const std::vector<std::string> winner_row = line_tokens(r.output, "a");
  REQUIRE(winner_row.size() == 5);
  CHECK(winner_row[1] == "1");    // allocation
  CHECK(winner_row[2] == "5");    // value
  CHECK(winner_row[3] == "3");    // payment: the bid it displaced
  CHECK(winner_row[4] == "yes");
  const std::vector<std::string> loser_row = line_tokens(r.output, "b");
  REQUIRE(loser_row.size() == 5);
  CHECK(loser_row[3] == "0");
  CHECK(r.output.find("social welfare 5") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("auction agrees with its exhaustive oracle on a small grid") {
  fs::path dir = fresh_dir("oracle");
  REQUIRE(run_tool("gen --kind mostly_increasing --clients 5 --resources 2 --units 3,3 --seed 7 --out " +
                   dir.string())
              .exit_code == 0);
  RunResult r = run_tool("auction " + dir.string() + " --oracle");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("oracle agreement") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("auction csv output and baseline check on concave single-resource data") {
  fs::path dir = fresh_dir("baseline");
  REQUIRE(run_tool("gen --kind concave --clients 6 --resources 1 --units 8 --seed 11 --out " +
                   dir.string())
              .exit_code == 0);
  const fs::path csv = dir / "result.csv";
  RunResult r = run_tool("auction " + dir.string() + " --verify-baseline --csv " + csv.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("baseline agreement") != std::string::npos);

  const std::vector<std::vector<std::string>> rows = read_csv(csv);
  REQUIRE(rows.size() == 7);  // header + 6 agents
  CHECK(rows[0] == std::vector<std::string>{"agent_id", "allocation", "value", "payment", "winner"});
  fs::remove_all(dir);
}

TEST_CASE("verify passes quickly on the healthy solver") {
  RunResult r = run_tool("verify --quick --seed 3");
  CHECK(r.exit_code == 0);
  for (const char* name :
       {"oracle_equivalence", "subauction_consistency", "auction_invariants", "index_soundness"}) {
    CHECK(r.output.find("suite " + std::string(name) + ": PASS") != std::string::npos);
  }
}

TEST_CASE("verify fails loudly when the filter fault is injected") {
  RunResult r = run_tool("verify --quick --seed 3 --inject-fault");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("suite oracle_equivalence: FAIL") != std::string::npos);
  CHECK(r.output.find("suite auction_invariants: FAIL") != std::string::npos);
  CHECK(r.output.find("reproduce: ") != std::string::npos);
  CHECK(r.output.find("--inject-fault") != std::string::npos);
}

TEST_CASE("bench writes self-describing csv files") {
  fs::path dir = fresh_dir("bench");
  RunResult r = run_tool("bench --out " + dir.string() +
                         " --kind increasing --clients 2 --resources 1 --units 31 --units 63"
                         " --reps 3 --naive");
  CHECK(r.exit_code == 0);

  const std::vector<std::vector<std::string>> joins = read_csv(dir / "joins.csv");
  REQUIRE(joins.size() >= 3);
  const std::vector<std::string>& header = joins[0];
  REQUIRE(header.size() == 18);
  CHECK(header[0] == "dataset");
  CHECK(header[6] == "ds_kind");
  CHECK(header[13] == "false_positive_ratio");
  int linear_rows = 0;
  for (std::size_t i = 1; i < joins.size(); ++i) {
    REQUIRE(joins[i].size() == header.size());
    CHECK(joins[i][1] == "1");    // seed
    CHECK(joins[i][2] == "1");    // resources
    if (joins[i][6] == "linear_scan") {
      ++linear_rows;
      CHECK(joins[i][13] == "0");  // a full scan fetches no false positives
    }
  }
  CHECK(linear_rows == 2);

  const std::vector<std::vector<std::string>> naive = read_csv(dir / "naive.csv");
  REQUIRE(naive.size() == 3);  // header + 2 sweep points
  for (std::size_t i = 1; i < naive.size(); ++i) {
    CHECK(naive[i][naive[0].size() - 2] == naive[i][naive[0].size() - 1]);  // counter == closed form
  }
  CHECK(fs::exists(dir / "run_info.csv"));
  fs::remove_all(dir);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-mrvcg-binary>\n", argv[0]);
    return 2;
  }
  g_tool = argv[1];
  doctest::Context context;
  context.applyCommandLine(1, argv);
  return context.run();
}
