#include "mrvcg/join.hpp"

#include <chrono>
#include <sstream>

namespace mrvcg {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_since(Clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
}

// Pareto survivors with the join's fault knob: the injected fault turns the
// unbounded lower-boundary left derivative into 0, which fails the strict
// positivity test and wrongly drops boundary allocations.
std::vector<std::uint32_t> survivors_for_join(const ValuationTensor& v, const GradientField& f,
                                              FaultInjection fault) {
  const int resources = v.capacity().resources();
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < v.capacity().cell_count(); ++i) {
    bool keep = true;
    for (int r = 0; r < resources; ++r) {
      double left = f.left[i * resources + r];
      if (fault == FaultInjection::pareto_boundary_as_zero && left == kUnbounded) left = 0.0;
      if (!(left > 0.0)) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

}  // namespace

std::pair<Allocation, Allocation> JointValuation::division_at(std::size_t cell) const {
  const ResourceCapacity& cap = tensor.capacity();
  if (!divisions.filled(cell)) {
    Allocation zero(cap.resources(), 0);
    return {zero, zero};
  }
  const Allocation total = cap.allocation_of(cell);
  const Allocation left = cap.allocation_of(divisions.left_cell(cell));
  Allocation right(cap.resources());
  for (int r = 0; r < cap.resources(); ++r) right[r] = total[r] - left[r];
  return {left, right};
}

JoinResult join_with_metrics(const ValuationTensor& a, const ValuationTensor& b,
                             const JoinOptions& options) {
  require(a.capacity() == b.capacity(), "join operands must share one capacity");
  const ResourceCapacity& cap = a.capacity();
  const int resources = cap.resources();
  const std::size_t cells = cap.cell_count();

  JoinResult result;
  JoinMetrics& metrics = result.metrics;
  const bool timing = options.collect_timing;
  const auto t_construct = Clock::now();

  const GradientField grad_a = gradient_field(a);
  const GradientField grad_b = gradient_field(b);
  std::vector<std::uint32_t> surv_a = survivors_for_join(a, grad_a, options.fault);
  std::vector<std::uint32_t> surv_b = survivors_for_join(b, grad_b, options.fault);

  // Queries come from the side with fewer survivors; the other side is
  // indexed. Values are symmetric, only the bookkeeping swaps.
  const bool swapped = surv_a.size() > surv_b.size();
  const ValuationTensor& query_side = swapped ? b : a;
  const ValuationTensor& index_side = swapped ? a : b;
  const GradientField& query_grad = swapped ? grad_b : grad_a;
  const GradientField& index_grad = swapped ? grad_a : grad_b;
  const std::vector<std::uint32_t>& query_cells = swapped ? surv_b : surv_a;
  const std::vector<std::uint32_t>& index_cells = swapped ? surv_a : surv_b;

  const int dims = 3 * resources;
  UbVectorSet set(dims);
  {
    std::vector<double> coords(dims);
    std::vector<int> alloc(resources);
    for (std::uint32_t cell : index_cells) {
      std::size_t rest = cell;
      for (int r = 0; r < resources; ++r) {
        alloc[r] = static_cast<int>(rest / cap.stride(r));
        rest %= cap.stride(r);
      }
      for (int r = 0; r < resources; ++r) {
        coords[r] = index_grad.right[static_cast<std::size_t>(cell) * resources + r];
        coords[resources + r] = -index_grad.left[static_cast<std::size_t>(cell) * resources + r];
        coords[2 * resources + r] = static_cast<double>(alloc[r]);
      }
      set.add(coords.data(), cell);
    }
  }
  UpperBoundIndex index = UpperBoundIndex::build(options.ds_kind, std::move(set), cap);
  if (timing) metrics.phase_ns.construct_ns = ns_since(t_construct);

  std::vector<double> joint(cells, 0.0);
  DivisionMap divisions(cap);

  QueryBound bound;
  bound.coords.resize(dims);
  QueryHandle handle;
  std::vector<std::uint32_t> ids;
  std::vector<std::uint32_t> matched;
  std::vector<int> alloc(resources);

  for (std::uint32_t qc : query_cells) {
    std::size_t rest = qc;
    for (int r = 0; r < resources; ++r) {
      alloc[r] = static_cast<int>(rest / cap.stride(r));
      rest %= cap.stride(r);
    }
    for (int r = 0; r < resources; ++r) {
      bound.coords[r] = query_grad.left[static_cast<std::size_t>(qc) * resources + r];
      bound.coords[resources + r] = -query_grad.right[static_cast<std::size_t>(qc) * resources + r];
      bound.coords[2 * resources + r] = static_cast<double>(cap.units(r) - alloc[r]);
    }

    const auto t_query = Clock::now();
    index.query(bound, handle);
    if (timing) metrics.phase_ns.query_ns += ns_since(t_query);
    ++metrics.queries_issued;

    const auto t_fetch = Clock::now();
    index.fetch_ids(handle, ids);
    matched.clear();
    const UbVectorSet& stored = index.vectors();
    for (std::uint32_t id : ids)
      if (bounded_by(stored.coords_of(id), bound, dims)) matched.push_back(id);
    if (timing) metrics.phase_ns.fetch_ns += ns_since(t_fetch);
    metrics.candidates_fetched += ids.size();
    metrics.exact_matches += matched.size();

    const auto t_compare = Clock::now();
    const double query_value = query_side.value(qc);
    for (std::uint32_t id : matched) {
      const std::uint32_t ic = stored.payload(id);
      const std::size_t cell = static_cast<std::size_t>(qc) + ic;
      const double v = query_value + index_side.value(ic);
      if (joint[cell] < v) {
        joint[cell] = v;
        divisions.set(cell, swapped ? ic : qc);
      }
    }
    metrics.comparisons_made += matched.size();
    if (timing) metrics.phase_ns.compare_ns += ns_since(t_compare);
  }

  result.joint.tensor = ValuationTensor(cap, std::move(joint));
  result.joint.divisions = std::move(divisions);
  return result;
}

JointValuation join(const ValuationTensor& a, const ValuationTensor& b,
                    const JoinOptions& options) {
  return join_with_metrics(a, b, options).joint;
}

NaiveJoinResult naive_join(const ValuationTensor& a, const ValuationTensor& b) {
  require(a.capacity() == b.capacity(), "join operands must share one capacity");
  const ResourceCapacity& cap = a.capacity();
  const int resources = cap.resources();
  const std::size_t cells = cap.cell_count();

  std::vector<double> joint(cells, 0.0);
  DivisionMap divisions(cap);
  std::uint64_t comparisons = 0;

  Allocation total(resources, 0);
  std::size_t total_lin = 0;
  do {
    total_lin = cap.linear_index(total);
    Allocation left(resources, 0);
    std::size_t left_lin = 0;
    double best = -1.0;
    std::uint32_t best_left = DivisionMap::kNone;
    while (true) {
      // Count only the divisions granting the right share a unit of every
      // resource; the remaining splits lie on a face of the division box.
      bool interior = true;
      for (int r = 0; r < resources; ++r)
        if (left[r] >= total[r]) {
          interior = false;
          break;
        }
      if (interior) ++comparisons;

      const double v = a.value(left_lin) + b.value(total_lin - left_lin);
      if (v > best) {
        best = v;
        best_left = static_cast<std::uint32_t>(left_lin);
      }

      int r = resources - 1;
      for (; r >= 0; --r) {
        if (left[r] < total[r]) {
          ++left[r];
          left_lin += cap.stride(r);
          break;
        }
        left_lin -= static_cast<std::size_t>(left[r]) * cap.stride(r);
        left[r] = 0;
      }
      if (r < 0) break;
    }
    joint[total_lin] = best;
    divisions.set(total_lin, best_left);
  } while (advance_odometer(total, cap));

  NaiveJoinResult out;
  out.joint.tensor = ValuationTensor(cap, std::move(joint));
  out.joint.divisions = std::move(divisions);
  out.comparisons = comparisons;
  return out;
}

std::uint64_t naive_comparison_closed_form(const ResourceCapacity& cap) {
  std::uint64_t product = 1;
  for (int r = 0; r < cap.resources(); ++r) {
    const std::uint64_t m = static_cast<std::uint64_t>(cap.units(r));
    const std::uint64_t per_resource = m * (m + 1) / 2;
    require(per_resource == 0 || product <= UINT64_MAX / per_resource,
            "comparison count overflows 64 bits");
    product *= per_resource;
  }
  return product;
}

std::string join_metrics_csv_header() {
  return "queries,candidates,matches,comparisons,false_positive_ratio,"
         "construct_ns,query_ns,fetch_ns,compare_ns";
}

std::string join_metrics_csv_row(const JoinMetrics& m) {
  std::ostringstream out;
  out << m.queries_issued << ',' << m.candidates_fetched << ',' << m.exact_matches << ','
      << m.comparisons_made << ',' << m.false_positive_ratio() << ',' << m.phase_ns.construct_ns
      << ',' << m.phase_ns.query_ns << ',' << m.phase_ns.fetch_ns << ',' << m.phase_ns.compare_ns;
  return out.str();
}

}  // namespace mrvcg
