#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mrvcg/errors.hpp"

namespace mrvcg {

// Units of each resource granted to one agent. Index r is the number of
// units of resource r, so the all-zero vector is "receives nothing".
using Allocation = std::vector<int>;

// Sentinel for "no left neighbour": the left derivative at the lower domain
// boundary. It compares greater than every finite value and is only ever
// compared, never used in arithmetic.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// The auctioned bundle: how many units of each of the R resources exist.
// An allocation grid over capacity m has cell_count() = prod(m_r + 1) cells,
// one per possible allocation, addressed row-major with the last resource
// varying fastest.
class ResourceCapacity {
 public:
  ResourceCapacity() = default;
  explicit ResourceCapacity(std::vector<int> units_per_resource);

  int resources() const { return static_cast<int>(units_.size()); }
  int units(int r) const { return units_[r]; }
  const std::vector<int>& units() const { return units_; }
  std::size_t cell_count() const { return cells_; }
  std::size_t stride(int r) const { return strides_[r]; }

  bool operator==(const ResourceCapacity& other) const { return units_ == other.units_; }
  bool operator!=(const ResourceCapacity& other) const { return units_ != other.units_; }

  // Row-major cell index of an allocation. Requires 0 <= a_r <= units(r).
  std::size_t linear_index(const Allocation& a) const;

  // Inverse of linear_index.
  Allocation allocation_of(std::size_t index) const;

  bool contains(const Allocation& a) const;

 private:
  std::vector<int> units_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
};

// Left and right partial derivatives of a valuation at one allocation,
// one entry per resource:
//   left[r]  = V(a) - V(a - e_r),  or kUnbounded when a_r = 0
//   right[r] = V(a + e_r) - V(a),  or 0 when a_r = units(r)
struct GradientPair {
  std::vector<double> left;
  std::vector<double> right;
};

// A full valuation function: one nonnegative finite value per allocation of
// the capacity grid, stored row-major. The all-zero allocation is worth
// exactly 0; construction rejects anything else.
class ValuationTensor {
 public:
  ValuationTensor() = default;
  ValuationTensor(ResourceCapacity capacity, std::vector<double> values);

  static ValuationTensor zeros(const ResourceCapacity& capacity);

  const ResourceCapacity& capacity() const { return capacity_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t index) const { return values_[index]; }
  double value(const Allocation& a) const { return values_[capacity_.linear_index(a)]; }

  // Largest value in the tensor and the lowest cell index attaining it.
  double max_value() const;
  std::size_t argmax() const;

  // The restriction of this valuation to a smaller capacity grid. Used when
  // re-solving over the bundle a subset of agents actually won.
  ValuationTensor restricted(const ResourceCapacity& sub) const;

 private:
  ResourceCapacity capacity_;
  std::vector<double> values_;
};

// Derivatives of V at the cell with the given index.
GradientPair gradients(const ValuationTensor& v, std::size_t index);
GradientPair gradients(const ValuationTensor& v, const Allocation& a);

// Left and right derivatives of every cell, flattened as cell * R + r.
// This is the bulk form the join engine consumes.
struct GradientField {
  std::vector<double> left;
  std::vector<double> right;
};
GradientField gradient_field(const ValuationTensor& v);

// Cell indices, in increasing order, of the allocations that survive Pareto
// filtering: every left derivative strictly positive. Such an allocation
// cannot be shrunk without losing value. The kUnbounded convention keeps
// boundary cells alive in their zero dimensions; in particular the all-zero
// allocation always survives, and for V identically 0 it is the only
// survivor.
std::vector<std::uint32_t> pareto_survivors(const ValuationTensor& v);

// Steps a row-major multi-index through the capacity grid in cell order.
// Returns false once the index wraps back to all zeros.
inline bool advance_odometer(Allocation& a, const ResourceCapacity& cap) {
  for (int r = cap.resources() - 1; r >= 0; --r) {
    if (a[r] < cap.units(r)) {
      ++a[r];
      return true;
    }
    a[r] = 0;
  }
  return false;
}

}  // namespace mrvcg
