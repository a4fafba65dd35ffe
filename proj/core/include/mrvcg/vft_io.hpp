#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mrvcg/types.hpp"

namespace mrvcg {

// Valuation function text format, version 1:
//
//   line 1:  VFT1
//   line 2:  R m_1 ... m_R
//   then     prod(m_r + 1) whitespace-separated values, row-major,
//            last resource varying fastest
//
// Values are written with shortest round-trip precision, so a write/read
// cycle reproduces every double bit for bit. Readers reject a wrong value
// count, trailing garbage and malformed headers. If the stored value of the
// all-zero allocation is not 0 the whole tensor is shifted down by it at
// ingestion; values that end up negative are rejected.

void write_vft(std::ostream& out, const ValuationTensor& v);
void write_vft(const std::filesystem::path& path, const ValuationTensor& v);

ValuationTensor read_vft(std::istream& in, const std::string& origin = "<stream>");
ValuationTensor read_vft(const std::filesystem::path& path);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace mrvcg
