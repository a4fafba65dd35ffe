#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "mrvcg/types.hpp"

namespace mrvcg {

// Index flavours for upper-bound queries. All of them answer the same
// question: given a per-dimension bound, which stored vectors are bounded
// above by it in every dimension? linear_scan and kd_tree answer exactly;
// the others may over-report and rely on the caller re-filtering, which the
// contract permits.
enum class DsKind {
  linear_scan,   // exact full scan, the reference the others are checked against
  sim_1d,        // k sorted arrays searched in lockstep, best single-dimension prefix
  sim_2d_trees,  // sorted arrays layered with partners from the same resource
  combination,   // vectors classed by boundary type, each class indexed by its vital dims
  kd_tree,       // exact layered multi-dimensional tree, small inputs only
};

std::string_view ds_kind_name(DsKind kind);
std::optional<DsKind> parse_ds_kind(std::string_view name);
const std::vector<DsKind>& all_ds_kinds();

// One stored point. For a valuation over R resources the 3R coordinates are
// laid out as: [0,R) the right derivatives, [R,2R) the negated left
// derivatives, [2R,3R) the allocation itself. The payload is the cell index
// of the originating allocation.
struct UBVector {
  std::vector<double> coords;
  std::uint32_t payload = 0;
};

// A query upper bound, same dimension layout as the stored vectors. For a
// querying allocation a of valuation V the blocks are: the left derivatives
// of V at a, the negated right derivatives, and the remaining capacity
// m - a (elementwise nonnegative).
struct QueryBound {
  std::vector<double> coords;
};

// Structure-of-arrays vector storage shared by every index kind. add() is
// the allocation-free path the join engine uses.
class UbVectorSet {
 public:
  explicit UbVectorSet(int dims) : dims_(dims) { require(dims >= 1, "need at least one dimension"); }

  void add(const double* coords, std::uint32_t payload) {
    coords_.insert(coords_.end(), coords, coords + dims_);
    payloads_.push_back(payload);
  }
  void add(const UBVector& v) {
    require(static_cast<int>(v.coords.size()) == dims_, "vector has wrong dimension count");
    add(v.coords.data(), v.payload);
  }

  int dims() const { return dims_; }
  std::size_t count() const { return payloads_.size(); }
  const double* coords_of(std::size_t i) const { return coords_.data() + i * dims_; }
  std::uint32_t payload(std::size_t i) const { return payloads_[i]; }

 private:
  int dims_;
  std::vector<double> coords_;
  std::vector<std::uint32_t> payloads_;
};

// Builds the stored vectors for the given cells of a valuation (typically
// its Pareto survivors), using the layout documented on UBVector.
UbVectorSet build_ub_vectors(const ValuationTensor& v, const std::vector<std::uint32_t>& cells);
UBVector make_ub_vector(const ValuationTensor& v, const Allocation& a);
QueryBound make_query_bound(const ValuationTensor& v, const Allocation& a);

// Vital-dimension bitmask over the 3R coordinate dimensions by boundary
// position alone: bit d set means dimension d can still discriminate. An
// allocation at a_r = units(r) has right derivative pinned to the minimum 0,
// an allocation at a_r = 0 has negated left derivative pinned to the minimum
// (negated unbounded); either clears the matching bit. Allocation-block bits
// are never cleared here. The combination index additionally clears any
// dimension whose coordinate equals the stored set's global minimum for that
// dimension, which can only widen the non-vital set.
std::uint32_t classify_boundary(const Allocation& a, const ResourceCapacity& cap);

class UpperBoundIndex;

// Result of one query: candidate positions inside the index, readable via
// UpperBoundIndex::fetch. Caller-owned, so concurrent readers of one index
// can each hold their own. Valid only against the index that produced it.
class QueryHandle {
 public:
  std::size_t candidate_count() const { return total_; }

 private:
  friend class UpperBoundIndex;
  friend struct QueryHandleFiller;
  struct Run {
    const std::uint32_t* ids;
    std::size_t len;
  };
  void clear() {
    runs_.clear();
    singles_.clear();
    total_ = 0;
  }
  void add_run(const std::uint32_t* ids, std::size_t len) {
    if (len == 0) return;
    runs_.push_back({ids, len});
    total_ += len;
  }
  void add_single(std::uint32_t id) {
    singles_.push_back(id);
    ++total_;
  }

  const void* owner_ = nullptr;
  std::vector<Run> runs_;
  std::vector<std::uint32_t> singles_;
  std::size_t total_ = 0;
};

// An immutable index over a vector set. Construction is deterministic (sort
// ties are broken by insertion order) and queries mutate nothing, so a built
// index may be queried from any number of threads as long as each uses its
// own QueryHandle.
class UpperBoundIndex {
 public:
  // The capacity describes the resource grid behind the vectors; the kinds
  // built from per-resource coordinate triples (sim_2d_trees, combination)
  // require dims() == 3 * resources. kd_tree refuses more than 1024 vectors
  // or more than 6 dimensions: its memory grows with n log^(k-1) n, which
  // makes it a small-input structure by design.
  static UpperBoundIndex build(DsKind kind, UbVectorSet set, const ResourceCapacity& cap);
  static UpperBoundIndex build(DsKind kind, const std::vector<UBVector>& vectors,
                               const ResourceCapacity& cap);

  UpperBoundIndex(UpperBoundIndex&&) noexcept;
  UpperBoundIndex& operator=(UpperBoundIndex&&) noexcept;
  ~UpperBoundIndex();

  DsKind kind() const { return kind_; }
  int dims() const { return set_.dims(); }
  std::size_t size() const { return set_.count(); }
  const UbVectorSet& vectors() const { return set_; }

  // Collects the candidates bounded by `bound` into `handle`. An empty index
  // yields an empty handle. Candidates are a superset of the exact answer
  // for the approximate kinds and exactly the answer for linear_scan and
  // kd_tree.
  void query(const QueryBound& bound, QueryHandle& handle) const;
  QueryHandle query(const QueryBound& bound) const;

  // Stored-vector positions of the handle's candidates, deterministic order,
  // no duplicates. The handle must come from this index.
  void fetch_ids(const QueryHandle& handle, std::vector<std::uint32_t>& out) const;
  std::vector<UBVector> fetch(const QueryHandle& handle) const;

 private:
  UpperBoundIndex(DsKind kind, UbVectorSet set);

  struct Impl;
  DsKind kind_;
  UbVectorSet set_;
  std::unique_ptr<Impl> impl_;
};

// True when every coordinate of the vector is bounded by the query,
// inclusively. The final say on whether a candidate is a real match.
inline bool bounded_by(const double* coords, const QueryBound& bound, int dims) {
  for (int d = 0; d < dims; ++d)
    if (!(coords[d] <= bound.coords[d])) return false;
  return true;
}

}  // namespace mrvcg
