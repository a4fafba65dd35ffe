#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "mrvcg/types.hpp"
#include "mrvcg/ubds.hpp"

namespace mrvcg {

// Records, for every cell of a joint valuation, how the cell's total splits
// between the two operands: the stored value is the cell index of the left
// operand's share, the right share is the cell's allocation minus it.
// Unfilled cells mean "this total is never worth taking", value 0; walkers
// read them as both sides taking nothing. The all-zero cell always splits
// into zero and zero.
class DivisionMap {
 public:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  DivisionMap() = default;
  explicit DivisionMap(const ResourceCapacity& cap) : left_(cap.cell_count(), kNone) {
    left_[0] = 0;
  }

  bool filled(std::size_t cell) const { return left_[cell] != kNone; }
  std::uint32_t left_cell(std::size_t cell) const { return left_[cell]; }
  void set(std::size_t cell, std::uint32_t left) { left_[cell] = left; }

 private:
  std::vector<std::uint32_t> left_;
};

// A joint valuation: the best achievable value of every exact total, plus
// the division that achieves it.
struct JointValuation {
  ValuationTensor tensor;
  DivisionMap divisions;

  // Left and right shares of a cell. Unfilled cells decode to (0, 0).
  std::pair<Allocation, Allocation> division_at(std::size_t cell) const;
};

// Deliberate defects for exercising the verification suites. The injected
// fault treats the lower-boundary left derivative as 0 instead of unbounded
// during Pareto filtering, which wrongly discards boundary allocations
// (including the all-zero one) and loses achievable welfare.
enum class FaultInjection { none, pareto_boundary_as_zero };

struct JoinOptions {
  DsKind ds_kind = DsKind::combination;
  bool collect_timing = true;
  FaultInjection fault = FaultInjection::none;
};

// Work counters for one join. The false-positive ratio is the share of
// fetched candidates that the element-wise re-filter rejected.
struct JoinMetrics {
  std::uint64_t queries_issued = 0;
  std::uint64_t candidates_fetched = 0;
  std::uint64_t exact_matches = 0;
  std::uint64_t comparisons_made = 0;
  struct Phases {
    std::uint64_t construct_ns = 0;
    std::uint64_t query_ns = 0;
    std::uint64_t fetch_ns = 0;
    std::uint64_t compare_ns = 0;
  } phase_ns;

  double false_positive_ratio() const {
    if (candidates_fetched == 0) return 0.0;
    return static_cast<double>(candidates_fetched - exact_matches) /
           static_cast<double>(candidates_fetched);
  }
};

std::string join_metrics_csv_header();
std::string join_metrics_csv_row(const JoinMetrics& m);

struct JoinResult {
  JointValuation joint;
  JoinMetrics metrics;
};

// Joins two valuations over the same capacity into their joint valuation,
// considering only division pairs that are Pareto efficient and locally
// optimal: a pair (a, b) survives when no unit transfer between the shares
// can pay off, which an upper-bound query expresses in one shot. Cells whose
// best split is never locally optimal stay unfilled; the global maximum of
// the joint tensor is nevertheless exact. Ties keep the first division
// found, so results are deterministic; the tensor itself is identical for
// every ds_kind. The index is built over whichever operand has more Pareto
// survivors, so the smaller side issues the queries.
JoinResult join_with_metrics(const ValuationTensor& a, const ValuationTensor& b,
                             const JoinOptions& options = {});
JointValuation join(const ValuationTensor& a, const ValuationTensor& b,
                    const JoinOptions& options = {});

// Reference join: for every cell the exact maximum over all of its
// divisions, by full enumeration. `comparisons` counts the divisions that
// hand the right share at least one unit of every resource; divisions lying
// on a face of the division box are excluded from the count.
struct NaiveJoinResult {
  JointValuation joint;
  std::uint64_t comparisons = 0;
};

NaiveJoinResult naive_join(const ValuationTensor& a, const ValuationTensor& b);

// Closed form the naive comparison counter must land on: the product over
// resources of m_r (m_r + 1) / 2.
std::uint64_t naive_comparison_closed_form(const ResourceCapacity& cap);

}  // namespace mrvcg
