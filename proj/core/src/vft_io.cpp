#include "mrvcg/vft_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace mrvcg {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_vft(std::ostream& out, const ValuationTensor& v) {
  const ResourceCapacity& cap = v.capacity();
  out << "VFT1\n" << cap.resources();
  for (int r = 0; r < cap.resources(); ++r) out << ' ' << cap.units(r);
  out << '\n';
  // Eight values per line keeps large files skimmable without bloating them.
  const std::vector<double>& values = v.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_double(values[i]);
    out << (((i + 1) % 8 == 0 || i + 1 == values.size()) ? '\n' : ' ');
  }
  if (!out) throw IoError("failed writing valuation");
}

void write_vft(const std::filesystem::path& path, const ValuationTensor& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_vft(out, v);
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw IoError(origin + ": " + what);
}

}  // namespace

ValuationTensor read_vft(std::istream& in, const std::string& origin) {
  std::string magic;
  if (!(in >> magic) || magic != "VFT1") fail(origin, "missing VFT1 header");
  int resources = 0;
  if (!(in >> resources) || resources < 1) fail(origin, "bad resource count");
  std::vector<int> units(resources);
  for (int r = 0; r < resources; ++r)
    if (!(in >> units[r]) || units[r] < 1) fail(origin, "bad unit count");

  ResourceCapacity cap(std::move(units));
  std::vector<double> values(cap.cell_count());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(in >> values[i])) fail(origin, "expected " + std::to_string(values.size()) + " values");
  std::string extra;
  if (in >> extra) fail(origin, "trailing content after values");

  const double base = values[0];
  if (base != 0.0)
    for (double& v : values) v -= base;
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0) fail(origin, "values must be finite and nonnegative");
  return ValuationTensor(std::move(cap), std::move(values));
}

ValuationTensor read_vft(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return read_vft(in, path.string());
}

}  // namespace mrvcg
