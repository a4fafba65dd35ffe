#include "mrvcg/ubds.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <map>

namespace mrvcg {

namespace {

// Segments at or below this size are scanned directly instead of being
// partitioned further. Keeps the layered structures shallow without giving
// up the prefix-run mechanics.
constexpr std::uint32_t kLeafCut = 16;

// kd_tree limits: its memory grows as N log^(k-1) N, so it is only built for
// small inputs: one grid axis of 2^10 cells and at most two resources (six
// dimensions).
constexpr std::size_t kKdMaxVectors = 1024;
constexpr int kKdMaxDims = 6;
constexpr std::uint32_t kKdLeafCut = 8;

constexpr int kMaxDims = 96;

}  // namespace

// Internal write access to QueryHandle for the engine code below.
struct QueryHandleFiller {
  static void add_run(QueryHandle& h, const std::uint32_t* ids, std::size_t len) {
    h.add_run(ids, len);
  }
  static void add_single(QueryHandle& h, std::uint32_t id) { h.add_single(id); }
};

std::string_view ds_kind_name(DsKind kind) {
  switch (kind) {
    case DsKind::linear_scan: return "linear_scan";
    case DsKind::sim_1d: return "sim_1d";
    case DsKind::sim_2d_trees: return "sim_2d_trees";
    case DsKind::combination: return "combination";
    case DsKind::kd_tree: return "kd_tree";
  }
  return "unknown";
}

std::optional<DsKind> parse_ds_kind(std::string_view name) {
  for (DsKind k : all_ds_kinds())
    if (name == ds_kind_name(k)) return k;
  return std::nullopt;
}

const std::vector<DsKind>& all_ds_kinds() {
  static const std::vector<DsKind> kinds = {DsKind::linear_scan, DsKind::sim_1d,
                                            DsKind::sim_2d_trees, DsKind::combination,
                                            DsKind::kd_tree};
  return kinds;
}

UbVectorSet build_ub_vectors(const ValuationTensor& v, const std::vector<std::uint32_t>& cells) {
  const ResourceCapacity& cap = v.capacity();
  const int resources = cap.resources();
  const GradientField f = gradient_field(v);
  UbVectorSet set(3 * resources);
  std::vector<double> coords(3 * resources);
  for (std::uint32_t cell : cells) {
    const Allocation a = cap.allocation_of(cell);
    for (int r = 0; r < resources; ++r) {
      coords[r] = f.right[static_cast<std::size_t>(cell) * resources + r];
      coords[resources + r] = -f.left[static_cast<std::size_t>(cell) * resources + r];
      coords[2 * resources + r] = static_cast<double>(a[r]);
    }
    set.add(coords.data(), cell);
  }
  return set;
}

UBVector make_ub_vector(const ValuationTensor& v, const Allocation& a) {
  const int resources = v.capacity().resources();
  const GradientPair g = gradients(v, a);
  UBVector out;
  out.coords.resize(3 * resources);
  for (int r = 0; r < resources; ++r) {
    out.coords[r] = g.right[r];
    out.coords[resources + r] = -g.left[r];
    out.coords[2 * resources + r] = static_cast<double>(a[r]);
  }
  out.payload = static_cast<std::uint32_t>(v.capacity().linear_index(a));
  return out;
}

QueryBound make_query_bound(const ValuationTensor& v, const Allocation& a) {
  const ResourceCapacity& cap = v.capacity();
  const int resources = cap.resources();
  const GradientPair g = gradients(v, a);
  QueryBound out;
  out.coords.resize(3 * resources);
  for (int r = 0; r < resources; ++r) {
    out.coords[r] = g.left[r];
    out.coords[resources + r] = -g.right[r];
    out.coords[2 * resources + r] = static_cast<double>(cap.units(r) - a[r]);
  }
  return out;
}

std::uint32_t classify_boundary(const Allocation& a, const ResourceCapacity& cap) {
  require(cap.contains(a), "allocation outside capacity");
  const int resources = cap.resources();
  require(3 * resources <= 32, "too many resources for a 32-bit mask");
  std::uint32_t vital = (3 * resources == 32) ? ~0u : ((1u << (3 * resources)) - 1u);
  for (int r = 0; r < resources; ++r) {
    if (a[r] == cap.units(r)) vital &= ~(1u << r);
    if (a[r] == 0) vital &= ~(1u << (resources + r));
  }
  return vital;
}

namespace {

// Sorts member ids by one coordinate, ties by id, so construction is a pure
// function of the input order.
std::vector<std::uint32_t> sorted_by_dim(const UbVectorSet& set,
                                         const std::vector<std::uint32_t>& members, int dim) {
  std::vector<std::uint32_t> order = members;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double ka = set.coords_of(a)[dim];
    const double kb = set.coords_of(b)[dim];
    if (ka != kb) return ka < kb;
    return a < b;
  });
  return order;
}

// Number of leading elements of `run` whose coordinate in `dim` is <= bound.
std::size_t prefix_len(const UbVectorSet& set, const std::uint32_t* run, std::size_t len, int dim,
                       double bound) {
  std::size_t lo = 0, hi = len;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (set.coords_of(run[mid])[dim] <= bound)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

// The workhorse behind sim_1d, sim_2d_trees and the combination classes.
//
// Each "main" dimension holds the members sorted by that coordinate. A query
// runs one binary search over all mains in lockstep: every step keeps only
// the mains whose search would continue into the lower half, unless all of
// them continue upward. The survivors necessarily agree on the final prefix
// length, which is the smallest over all mains, so the first survivor is the
// best filtering dimension.
//
// A main may carry up to two secondary dimensions. The chosen main's prefix
// is then decomposed into its canonical binary partitions; each partition
// stores its members re-sorted by every secondary dimension, and contributes
// the shorter of its secondary prefixes. Partitions at kLeafCut or below are
// scanned directly against the secondary bounds.
struct SimEngine {
  struct Sub {
    int dim = -1;
    std::vector<std::uint32_t> ids;  // level l occupies [l * n, (l + 1) * n)
  };
  struct Main {
    int dim = -1;
    std::vector<std::uint32_t> order;
    std::vector<double> keys;
    std::array<Sub, 2> subs;
    int sub_count = 0;
  };

  std::uint32_t n = 0;
  std::vector<Main> mains;

  void build(const UbVectorSet& set, const std::vector<std::uint32_t>& members,
             const std::vector<std::pair<int, std::vector<int>>>& layout,
             std::vector<std::uint32_t>& pos_scratch) {
    n = static_cast<std::uint32_t>(members.size());
    mains.reserve(layout.size());
    for (const auto& [dim, subdims] : layout) {
      Main m;
      m.dim = dim;
      m.order = sorted_by_dim(set, members, dim);
      m.keys.resize(n);
      for (std::uint32_t p = 0; p < n; ++p) m.keys[p] = set.coords_of(m.order[p])[dim];
      if (!subdims.empty()) {
        for (std::uint32_t p = 0; p < n; ++p) pos_scratch[m.order[p]] = p;
        for (int sd : subdims) {
          Sub& s = m.subs[m.sub_count++];
          s.dim = sd;
          build_levels(set, members, pos_scratch, s);
        }
      }
      mains.push_back(std::move(m));
    }
  }

  void build_levels(const UbVectorSet& set, const std::vector<std::uint32_t>& members,
                    const std::vector<std::uint32_t>& pos_of, Sub& s) const {
    s.ids = sorted_by_dim(set, members, s.dim);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> segs{{0, n}};
    std::vector<std::uint32_t> next(n);
    while (true) {
      bool split_any = false;
      for (auto [lo, hi] : segs)
        if (hi - lo > kLeafCut) split_any = true;
      if (!split_any) break;
      const std::uint32_t* prev = s.ids.data() + s.ids.size() - n;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> next_segs;
      next_segs.reserve(segs.size() * 2);
      for (auto [lo, hi] : segs) {
        if (hi - lo <= kLeafCut) {
          std::copy(prev + lo, prev + hi, next.begin() + lo);
          next_segs.emplace_back(lo, hi);
          continue;
        }
        const std::uint32_t mid = (lo + hi) / 2;
        std::uint32_t a = lo, b = mid;
        for (std::uint32_t p = lo; p < hi; ++p) {
          const std::uint32_t id = prev[p];
          if (pos_of[id] < mid)
            next[a++] = id;
          else
            next[b++] = id;
        }
        next_segs.emplace_back(lo, mid);
        next_segs.emplace_back(mid, hi);
      }
      s.ids.insert(s.ids.end(), next.begin(), next.end());
      segs = std::move(next_segs);
    }
  }

  // Lockstep search. Returns the shared prefix length and the index of the
  // first surviving main.
  std::pair<std::uint32_t, int> lockstep(const QueryBound& bound) const {
    std::array<int, kMaxDims> active;
    int active_count = static_cast<int>(mains.size());
    for (int i = 0; i < active_count; ++i) active[i] = i;
    std::uint32_t lo = 0, hi = n;
    while (lo < hi) {
      const std::uint32_t mid = (lo + hi) / 2;
      std::array<int, kMaxDims> lower;
      int lower_count = 0;
      for (int i = 0; i < active_count; ++i) {
        const Main& m = mains[active[i]];
        if (!(m.keys[mid] <= bound.coords[m.dim])) lower[lower_count++] = active[i];
      }
      if (lower_count > 0) {
        active = lower;
        active_count = lower_count;
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return {lo, active[0]};
  }

  void collect(const UbVectorSet& set, const QueryBound& bound, std::uint32_t pos, const Main& m,
               QueryHandle& h) const {
    if (pos == 0) return;
    if (m.sub_count == 0) {
      QueryHandleFiller::add_run(h, m.order.data(), pos);
      return;
    }
    std::uint32_t lo = 0, hi = n;
    int level = 0;
    while (true) {
      if (pos == hi) {
        emit(set, bound, m, lo, hi, level, h);
        return;
      }
      if (hi - lo <= kLeafCut) {
        for (std::uint32_t p = lo; p < pos; ++p) {
          const std::uint32_t id = m.order[p];
          bool ok = true;
          for (int s = 0; s < m.sub_count; ++s)
            if (!(set.coords_of(id)[m.subs[s].dim] <= bound.coords[m.subs[s].dim])) {
              ok = false;
              break;
            }
          if (ok) QueryHandleFiller::add_single(h, id);
        }
        return;
      }
      const std::uint32_t mid = (lo + hi) / 2;
      if (pos <= mid) {
        hi = mid;
        ++level;
      } else {
        emit(set, bound, m, lo, mid, level + 1, h);
        lo = mid;
        ++level;
      }
    }
  }

  void emit(const UbVectorSet& set, const QueryBound& bound, const Main& m, std::uint32_t lo,
            std::uint32_t hi, int level, QueryHandle& h) const {
    const std::uint32_t* best_run = nullptr;
    std::size_t best_len = 0;
    for (int s = 0; s < m.sub_count; ++s) {
      const Sub& sub = m.subs[s];
      const std::uint32_t* run = sub.ids.data() + static_cast<std::size_t>(level) * n + lo;
      const std::size_t len = prefix_len(set, run, hi - lo, sub.dim, bound.coords[sub.dim]);
      if (s == 0 || len < best_len) {
        best_run = run;
        best_len = len;
      }
    }
    QueryHandleFiller::add_run(h, best_run, best_len);
  }

  void query(const UbVectorSet& set, const QueryBound& bound, QueryHandle& h) const {
    if (n == 0) return;
    const auto [pos, chosen] = lockstep(bound);
    collect(set, bound, pos, mains[chosen], h);
  }
};

// Layered exact tree. Level d sorts by dimension d; every canonical binary
// partition of that order owns a recursively built tree over the remaining
// dimensions, so a query decomposes each prefix into partitions and finishes
// with exact prefixes in the final dimension. No false positives, at the
// price of memory that limits it to small inputs.
struct KdNode {
  int dim = 0;
  bool last = false;
  bool leaf = false;
  std::vector<std::uint32_t> order;
  std::vector<double> keys;
  struct Seg {
    std::uint32_t lo, mid, hi;
    std::unique_ptr<KdNode> sub;
    std::unique_ptr<Seg> left, right;
  };
  std::unique_ptr<Seg> root;
};

std::unique_ptr<KdNode> build_kd(const UbVectorSet& set, std::vector<std::uint32_t> members,
                                 int dim) {
  auto node = std::make_unique<KdNode>();
  node->dim = dim;
  node->order = sorted_by_dim(set, members, dim);
  const std::uint32_t n = static_cast<std::uint32_t>(node->order.size());
  node->keys.resize(n);
  for (std::uint32_t p = 0; p < n; ++p) node->keys[p] = set.coords_of(node->order[p])[dim];
  node->last = (dim + 1 == set.dims());
  node->leaf = !node->last && n <= kKdLeafCut;
  if (node->last || node->leaf) return node;

  struct Builder {
    const UbVectorSet& set;
    const std::vector<std::uint32_t>& order;
    int dim;
    std::unique_ptr<KdNode::Seg> make(std::uint32_t lo, std::uint32_t hi) {
      auto seg = std::make_unique<KdNode::Seg>();
      seg->lo = lo;
      seg->hi = hi;
      seg->mid = (lo + hi) / 2;
      seg->sub = build_kd(set, {order.begin() + lo, order.begin() + hi}, dim + 1);
      if (hi - lo > kKdLeafCut) {
        seg->left = make(lo, seg->mid);
        seg->right = make(seg->mid, hi);
      }
      return seg;
    }
  } builder{set, node->order, dim};
  node->root = builder.make(0, n);
  return node;
}

void query_kd(const KdNode& node, const UbVectorSet& set, const QueryBound& bound,
              QueryHandle& h) {
  const std::uint32_t n = static_cast<std::uint32_t>(node.order.size());
  std::uint32_t lo = 0, hi = n;
  while (lo < hi) {
    const std::uint32_t mid = (lo + hi) / 2;
    if (node.keys[mid] <= bound.coords[node.dim])
      lo = mid + 1;
    else
      hi = mid;
  }
  const std::uint32_t pos = lo;
  if (pos == 0) return;
  if (node.last) {
    QueryHandleFiller::add_run(h, node.order.data(), pos);
    return;
  }
  const int dims = set.dims();
  auto scan_tail = [&](std::uint32_t from, std::uint32_t to) {
    for (std::uint32_t p = from; p < to; ++p) {
      const std::uint32_t id = node.order[p];
      const double* c = set.coords_of(id);
      bool ok = true;
      for (int d = node.dim + 1; d < dims; ++d)
        if (!(c[d] <= bound.coords[d])) {
          ok = false;
          break;
        }
      if (ok) QueryHandleFiller::add_single(h, id);
    }
  };
  if (node.leaf) {
    scan_tail(0, pos);
    return;
  }
  const KdNode::Seg* seg = node.root.get();
  while (true) {
    if (pos == seg->hi) {
      query_kd(*seg->sub, set, bound, h);
      return;
    }
    if (!seg->left) {
      scan_tail(seg->lo, pos);
      return;
    }
    if (pos <= seg->mid) {
      seg = seg->left.get();
    } else {
      query_kd(*seg->left->sub, set, bound, h);
      seg = seg->right.get();
    }
  }
}

struct CombClass {
  std::uint32_t vital_mask = 0;
  std::vector<std::uint32_t> members;  // fetched whole when no dimension is vital
  SimEngine engine;
  bool has_engine = false;
};

}  // namespace

struct UpperBoundIndex::Impl {
  SimEngine whole;
  bool has_whole = false;
  std::vector<CombClass> classes;
  std::unique_ptr<KdNode> kd;
};

UpperBoundIndex::UpperBoundIndex(DsKind kind, UbVectorSet set)
    : kind_(kind), set_(std::move(set)), impl_(std::make_unique<Impl>()) {}

UpperBoundIndex::UpperBoundIndex(UpperBoundIndex&&) noexcept = default;
UpperBoundIndex& UpperBoundIndex::operator=(UpperBoundIndex&&) noexcept = default;
UpperBoundIndex::~UpperBoundIndex() = default;

UpperBoundIndex UpperBoundIndex::build(DsKind kind, UbVectorSet set, const ResourceCapacity& cap) {
  const int dims = set.dims();
  require(dims <= kMaxDims, "too many dimensions");
  if (kind == DsKind::sim_2d_trees || kind == DsKind::combination)
    require(dims == 3 * cap.resources(),
            "per-resource kinds need the three-blocks-per-resource layout");
  if (kind == DsKind::kd_tree)
    require(set.count() <= kKdMaxVectors && dims <= kKdMaxDims,
            "kd_tree is restricted to small inputs");

  UpperBoundIndex idx(kind, std::move(set));
  const UbVectorSet& s = idx.set_;
  const std::uint32_t n = static_cast<std::uint32_t>(s.count());
  if (n == 0) return idx;

  std::vector<std::uint32_t> everyone(n);
  for (std::uint32_t i = 0; i < n; ++i) everyone[i] = i;
  std::vector<std::uint32_t> pos_scratch(n);

  const int resources = cap.resources();
  auto triple_partners = [&](int d) {
    const int r = d % resources;
    std::vector<int> partners;
    for (int block = 0; block < 3; ++block) {
      const int other = block * resources + r;
      if (other != d) partners.push_back(other);
    }
    return partners;
  };

  switch (kind) {
    case DsKind::linear_scan:
      break;
    case DsKind::sim_1d: {
      std::vector<std::pair<int, std::vector<int>>> layout;
      for (int d = 0; d < dims; ++d) layout.emplace_back(d, std::vector<int>{});
      idx.impl_->whole.build(s, everyone, layout, pos_scratch);
      idx.impl_->has_whole = true;
      break;
    }
    case DsKind::sim_2d_trees: {
      std::vector<std::pair<int, std::vector<int>>> layout;
      for (int d = 0; d < dims; ++d) layout.emplace_back(d, triple_partners(d));
      idx.impl_->whole.build(s, everyone, layout, pos_scratch);
      idx.impl_->has_whole = true;
      break;
    }
    case DsKind::combination: {
      std::vector<double> global_min(dims);
      for (int d = 0; d < dims; ++d) global_min[d] = s.coords_of(0)[d];
      for (std::uint32_t i = 1; i < n; ++i)
        for (int d = 0; d < dims; ++d)
          global_min[d] = std::min(global_min[d], s.coords_of(i)[d]);

      std::map<std::uint32_t, std::vector<std::uint32_t>> grouped;
      for (std::uint32_t i = 0; i < n; ++i) {
        const double* c = s.coords_of(i);
        std::uint32_t vital = (dims == 32) ? ~0u : ((1u << dims) - 1u);
        for (int r = 0; r < resources; ++r) {
          if (c[2 * resources + r] == static_cast<double>(cap.units(r))) vital &= ~(1u << r);
          if (c[2 * resources + r] == 0.0) vital &= ~(1u << (resources + r));
        }
        for (int d = 0; d < dims; ++d)
          if (c[d] <= global_min[d]) vital &= ~(1u << d);
        grouped[vital].push_back(i);
      }
      for (auto& [mask, members] : grouped) {
        CombClass cls;
        cls.vital_mask = mask;
        const int nvital = std::popcount(mask);
        if (nvital == 0) {
          cls.members = std::move(members);
        } else {
          std::vector<int> vital_dims;
          for (int d = 0; d < dims; ++d)
            if (mask & (1u << d)) vital_dims.push_back(d);
          std::vector<std::pair<int, std::vector<int>>> layout;
          if (nvital <= 2) {
            std::vector<int> subs(vital_dims.begin() + 1, vital_dims.end());
            layout.emplace_back(vital_dims[0], subs);
          } else {
            for (int d : vital_dims) {
              std::vector<int> partners;
              for (int p : triple_partners(d))
                if (mask & (1u << p)) partners.push_back(p);
              layout.emplace_back(d, partners);
            }
          }
          cls.engine.build(s, members, layout, pos_scratch);
          cls.has_engine = true;
        }
        idx.impl_->classes.push_back(std::move(cls));
      }
      break;
    }
    case DsKind::kd_tree:
      idx.impl_->kd = build_kd(s, everyone, 0);
      break;
  }
  return idx;
}

UpperBoundIndex UpperBoundIndex::build(DsKind kind, const std::vector<UBVector>& vectors,
                                       const ResourceCapacity& cap) {
  UbVectorSet set(vectors.empty() ? 3 * cap.resources()
                                  : static_cast<int>(vectors.front().coords.size()));
  for (const UBVector& v : vectors) set.add(v);
  return build(kind, std::move(set), cap);
}

void UpperBoundIndex::query(const QueryBound& bound, QueryHandle& handle) const {
  require(static_cast<int>(bound.coords.size()) == set_.dims(),
          "query bound has wrong dimension count");
  handle.clear();
  handle.owner_ = this;
  const std::uint32_t n = static_cast<std::uint32_t>(set_.count());
  if (n == 0) return;
  switch (kind_) {
    case DsKind::linear_scan:
      for (std::uint32_t i = 0; i < n; ++i)
        if (bounded_by(set_.coords_of(i), bound, set_.dims())) handle.add_single(i);
      break;
    case DsKind::sim_1d:
    case DsKind::sim_2d_trees:
      impl_->whole.query(set_, bound, handle);
      break;
    case DsKind::combination:
      for (const CombClass& cls : impl_->classes) {
        if (cls.has_engine)
          cls.engine.query(set_, bound, handle);
        else
          handle.add_run(cls.members.data(), cls.members.size());
      }
      break;
    case DsKind::kd_tree:
      query_kd(*impl_->kd, set_, bound, handle);
      break;
  }
}

QueryHandle UpperBoundIndex::query(const QueryBound& bound) const {
  QueryHandle h;
  query(bound, h);
  return h;
}

void UpperBoundIndex::fetch_ids(const QueryHandle& handle, std::vector<std::uint32_t>& out) const {
  require(handle.owner_ == this, "handle does not belong to this index");
  out.clear();
  out.reserve(handle.total_);
  for (const QueryHandle::Run& run : handle.runs_) out.insert(out.end(), run.ids, run.ids + run.len);
  out.insert(out.end(), handle.singles_.begin(), handle.singles_.end());
}

std::vector<UBVector> UpperBoundIndex::fetch(const QueryHandle& handle) const {
  std::vector<std::uint32_t> ids;
  fetch_ids(handle, ids);
  std::vector<UBVector> out;
  out.reserve(ids.size());
  for (std::uint32_t id : ids) {
    UBVector v;
    v.coords.assign(set_.coords_of(id), set_.coords_of(id) + set_.dims());
    v.payload = set_.payload(id);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mrvcg
