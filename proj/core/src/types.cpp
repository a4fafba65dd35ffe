#include "mrvcg/types.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

namespace mrvcg {

namespace {

// Cell counts stay below 2^31 so cell indices fit the 32-bit payloads used
// throughout the join engine.
constexpr std::size_t kMaxCells = std::size_t{1} << 31;

}  // namespace

ResourceCapacity::ResourceCapacity(std::vector<int> units_per_resource)
    : units_(std::move(units_per_resource)) {
  require(!units_.empty(), "capacity needs at least one resource");
  for (int m : units_) require(m >= 1, "every resource needs at least one unit");
  strides_.assign(units_.size(), 1);
  cells_ = 1;
  for (int r = static_cast<int>(units_.size()) - 1; r >= 0; --r) {
    strides_[r] = cells_;
    const std::size_t extent = static_cast<std::size_t>(units_[r]) + 1;
    require(cells_ <= kMaxCells / extent, "capacity grid too large to index");
    cells_ *= extent;
  }
}

std::size_t ResourceCapacity::linear_index(const Allocation& a) const {
  require(a.size() == units_.size(), "allocation has wrong resource count");
  std::size_t index = 0;
  for (std::size_t r = 0; r < units_.size(); ++r) {
    require(a[r] >= 0 && a[r] <= units_[r], "allocation outside capacity");
    index += static_cast<std::size_t>(a[r]) * strides_[r];
  }
  return index;
}

Allocation ResourceCapacity::allocation_of(std::size_t index) const {
  require(index < cells_, "cell index outside capacity grid");
  Allocation a(units_.size());
  for (std::size_t r = 0; r < units_.size(); ++r) {
    a[r] = static_cast<int>(index / strides_[r]);
    index %= strides_[r];
  }
  return a;
}

bool ResourceCapacity::contains(const Allocation& a) const {
  if (a.size() != units_.size()) return false;
  for (std::size_t r = 0; r < units_.size(); ++r)
    if (a[r] < 0 || a[r] > units_[r]) return false;
  return true;
}

ValuationTensor::ValuationTensor(ResourceCapacity capacity, std::vector<double> values)
    : capacity_(std::move(capacity)), values_(std::move(values)) {
  require(capacity_.resources() > 0, "tensor needs a capacity");
  require(values_.size() == capacity_.cell_count(), "value count does not match capacity grid");
  require(values_[0] == 0.0, "value of the all-zero allocation must be 0");
  for (double v : values_)
    require(std::isfinite(v) && v >= 0.0, "values must be finite and nonnegative");
}

ValuationTensor ValuationTensor::zeros(const ResourceCapacity& capacity) {
  return ValuationTensor(capacity, std::vector<double>(capacity.cell_count(), 0.0));
}

double ValuationTensor::max_value() const { return values_[argmax()]; }

std::size_t ValuationTensor::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (values_[i] > values_[best]) best = i;
  return best;
}

ValuationTensor ValuationTensor::restricted(const ResourceCapacity& sub) const {
  require(sub.resources() == capacity_.resources(), "restriction changes resource count");
  for (int r = 0; r < sub.resources(); ++r)
    require(sub.units(r) <= capacity_.units(r), "restriction must shrink the grid");
  std::vector<double> out;
  out.reserve(sub.cell_count());
  Allocation a(sub.resources(), 0);
  do {
    out.push_back(values_[capacity_.linear_index(a)]);
  } while (advance_odometer(a, sub));
  return ValuationTensor(sub, std::move(out));
}

GradientPair gradients(const ValuationTensor& v, std::size_t index) {
  const ResourceCapacity& cap = v.capacity();
  require(index < cap.cell_count(), "cell index outside capacity grid");
  const Allocation a = cap.allocation_of(index);
  GradientPair g;
  g.left.resize(cap.resources());
  g.right.resize(cap.resources());
  for (int r = 0; r < cap.resources(); ++r) {
    g.left[r] = (a[r] == 0) ? kUnbounded : v.value(index) - v.value(index - cap.stride(r));
    g.right[r] = (a[r] == cap.units(r)) ? 0.0 : v.value(index + cap.stride(r)) - v.value(index);
  }
  return g;
}

GradientPair gradients(const ValuationTensor& v, const Allocation& a) {
  return gradients(v, v.capacity().linear_index(a));
}

GradientField gradient_field(const ValuationTensor& v) {
  const ResourceCapacity& cap = v.capacity();
  const int resources = cap.resources();
  const std::size_t cells = cap.cell_count();
  GradientField f;
  f.left.resize(cells * resources);
  f.right.resize(cells * resources);
  Allocation a(resources, 0);
  std::size_t i = 0;
  do {
    for (int r = 0; r < resources; ++r) {
      f.left[i * resources + r] =
          (a[r] == 0) ? kUnbounded : v.value(i) - v.value(i - cap.stride(r));
      f.right[i * resources + r] =
          (a[r] == cap.units(r)) ? 0.0 : v.value(i + cap.stride(r)) - v.value(i);
    }
    ++i;
  } while (advance_odometer(a, cap));
  return f;
}

std::vector<std::uint32_t> pareto_survivors(const ValuationTensor& v) {
  const GradientField f = gradient_field(v);
  const int resources = v.capacity().resources();
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < v.capacity().cell_count(); ++i) {
    bool keep = true;
    for (int r = 0; r < resources; ++r) {
      if (!(f.left[i * resources + r] > 0.0)) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

}  // namespace mrvcg
