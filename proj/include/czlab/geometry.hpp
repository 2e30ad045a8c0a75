#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "czlab/core.hpp"

namespace czlab {

inline constexpr int max_dimension = 6;

/// Closed axis-parallel cube: center point and side length. Point
/// membership is half-open per axis (lo < p <= hi) so that a grid cell
/// center lying on the shared face of two cubes is counted for the
/// lower-index one.
struct Cube {
  std::vector<double> center;
  double side = 1.0;

  Cube() = default;
  Cube(std::vector<double> c, double s) : center(std::move(c)), side(s) {
    if (center.empty() || static_cast<int>(center.size()) > max_dimension)
      throw invalid_input("cube dimension must be in [1," + std::to_string(max_dimension) + "]");
    if (!(side > 0.0) || !std::isfinite(side)) throw invalid_input("cube side must be positive");
  }

  int dim() const { return static_cast<int>(center.size()); }
  double volume() const { return ipow(side, dim()); }
  double lo(int axis) const { return center[axis] - 0.5 * side; }
  double hi(int axis) const { return center[axis] + 0.5 * side; }

  bool contains_point(std::span<const double> p) const {
    for (int a = 0; a < dim(); ++a)
      if (!(lo(a) < p[a] && p[a] <= hi(a))) return false;
    return true;
  }

  /// Geometric containment Q' subset of this, with a relative slack so that
  /// exact dyadic arithmetic is not required of callers.
  bool contains_cube(const Cube& q, double rel_tol = 1e-12) const {
    const double eps = rel_tol * side;
    for (int a = 0; a < dim(); ++a)
      if (q.lo(a) < lo(a) - eps || q.hi(a) > hi(a) + eps) return false;
    return true;
  }

  std::string describe() const {
    std::ostringstream os;
    for (int a = 0; a < dim(); ++a) {
      if (a) os << "x";
      os << "[" << format_full(lo(a)) << "," << format_full(hi(a)) << "]";
    }
    return os.str();
  }
};

/// Center-preserving dilation factor*Q.
inline Cube dilate(const Cube& q, double factor) {
  if (!(factor > 0.0)) throw invalid_input("dilate: factor must be positive");
  return Cube(q.center, q.side * factor);
}

/// The dyadic cubes of `root` down to level `max_level`, optionally
/// augmented with every half-shifted dyadic family (2^n shift vectors per
/// level), clipped to cubes fully contained in the root. This finite family
/// stands in for the supremum over all cubes: any cube is comparable to a
/// shifted dyadic cube within a fixed dilation factor.
struct CubeFamily {
  Cube root;
  int max_level = 0;
  bool half_shifts = true;

  CubeFamily(Cube r, int levels, bool shifts = true)
      : root(std::move(r)), max_level(levels), half_shifts(shifts) {
    if (max_level < 0) throw invalid_input("cube family: max_level must be >= 0");
  }
};

/// Deterministic enumeration: level ascending, shift pattern ascending,
/// then row-major position. Includes the root itself; every cube returned
/// is contained in the root.
inline std::vector<Cube> enumerate_cubes(const CubeFamily& family) {
  const int n = family.root.dim();
  const int n_shifts = family.half_shifts ? (1 << n) : 1;
  std::vector<Cube> out;
  std::vector<double> c(n);
  std::vector<long> pos(n);
  for (int level = 0; level <= family.max_level; ++level) {
    const double s = family.root.side / static_cast<double>(1l << level);
    const long per_axis = 1l << level;
    for (int shift = 0; shift < n_shifts; ++shift) {
      std::fill(pos.begin(), pos.end(), 0);
      while (true) {
        for (int a = 0; a < n; ++a) {
          const double off = (shift >> a) & 1 ? 0.5 : 0.0;
          c[a] = family.root.lo(a) + (static_cast<double>(pos[a]) + 0.5 + off) * s;
        }
        Cube q(c, s);
        if (family.root.contains_cube(q)) out.push_back(std::move(q));
        int a = n - 1;
        while (a >= 0 && ++pos[a] == per_axis) pos[a--] = 0;
        if (a < 0) break;
      }
    }
  }
  return out;
}

namespace detail {

/// Row-major decode: axis 0 slowest, axis n-1 fastest.
inline void decode_cell(std::size_t idx, long per_axis, int n, std::span<long> out) {
  for (int a = n - 1; a >= 0; --a) {
    out[a] = static_cast<long>(idx % static_cast<std::size_t>(per_axis));
    idx /= static_cast<std::size_t>(per_axis);
  }
}

}  // namespace detail

/// 2^{Ln} congruent cells tiling Q in deterministic row-major order.
inline std::vector<Cube> cell_partition(const Cube& q, int level) {
  if (level < 0) throw invalid_input("cell_partition: level must be >= 0");
  const int n = q.dim();
  const long per_axis = 1l << level;
  const double w = q.side / static_cast<double>(per_axis);
  std::size_t count = 1;
  for (int a = 0; a < n; ++a) count *= static_cast<std::size_t>(per_axis);
  std::vector<Cube> cells;
  cells.reserve(count);
  std::vector<long> pos(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < count; ++i) {
    detail::decode_cell(i, per_axis, n, pos);
    for (int a = 0; a < n; ++a) c[a] = q.lo(a) + (static_cast<double>(pos[a]) + 0.5) * w;
    cells.emplace_back(c, w);
  }
  return cells;
}

/// Uniform dyadic grid over a root cube: the backbone shared by measures
/// and sampled functions. Cell centers are precomputed into a flat array so
/// kernel loops never allocate.
class Grid {
 public:
  Grid(Cube root, int level) : root_(std::move(root)), level_(level) {
    if (level < 0) throw invalid_input("grid: level must be >= 0");
    const int n = root_.dim();
    if (level * n > 48) throw invalid_input("grid: resolution too large");
    per_axis_ = 1l << level;
    width_ = root_.side / static_cast<double>(per_axis_);
    count_ = 1;
    for (int a = 0; a < n; ++a) count_ *= static_cast<std::size_t>(per_axis_);
    centers_.resize(count_ * static_cast<std::size_t>(n));
    std::vector<long> pos(n);
    for (std::size_t i = 0; i < count_; ++i) {
      detail::decode_cell(i, per_axis_, n, pos);
      for (int a = 0; a < n; ++a)
        centers_[i * n + a] = root_.lo(a) + (static_cast<double>(pos[a]) + 0.5) * width_;
    }
  }

  const Cube& root() const { return root_; }
  int level() const { return level_; }
  int dim() const { return root_.dim(); }
  long cells_per_axis() const { return per_axis_; }
  std::size_t cell_count() const { return count_; }
  double cell_width() const { return width_; }
  double cell_volume() const { return ipow(width_, dim()); }
  double diameter() const { return root_.side * std::sqrt(static_cast<double>(dim())); }

  std::span<const double> center(std::size_t cell) const {
    return {centers_.data() + cell * static_cast<std::size_t>(dim()),
            static_cast<std::size_t>(dim())};
  }

  Cube cell_cube(std::size_t cell) const {
    auto c = center(cell);
    return Cube(std::vector<double>(c.begin(), c.end()), width_);
  }

  bool same_layout(const Grid& other) const {
    if (level_ != other.level_ || dim() != other.dim()) return false;
    if (root_.side != other.root_.side) return false;
    for (int a = 0; a < dim(); ++a)
      if (root_.center[a] != other.root_.center[a]) return false;
    return true;
  }

  /// Cell containing p under the (lo,hi] membership rule, if any.
  std::optional<std::size_t> locate(std::span<const double> p) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim(); ++a) {
      const long i = axis_locate(a, p[a]);
      if (i < 0) return std::nullopt;
      idx = idx * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(i);
    }
    return idx;
  }

  /// Index range [begin,end) of cells along one axis whose centers lie in
  /// the half-open interval (lo, hi].
  struct AxisRange {
    long begin = 0;
    long end = 0;
  };

  AxisRange axis_range(int axis, double lo, double hi) const {
    // Closed-form guess, then nudge against the exact predicate so the
    // result matches (lo < c <= hi) regardless of rounding.
    const double base = root_.lo(axis);
    long b = static_cast<long>(std::floor((lo - base) / width_ - 0.5)) + 1;
    b = std::clamp(b, 0l, per_axis_);
    while (b < per_axis_ && !(axis_center(axis, b) > lo)) ++b;
    while (b > 0 && axis_center(axis, b - 1) > lo) --b;
    long e = static_cast<long>(std::floor((hi - base) / width_ - 0.5)) + 1;
    e = std::clamp(e, 0l, per_axis_);
    while (e < per_axis_ && axis_center(axis, e) <= hi) ++e;
    while (e > 0 && !(axis_center(axis, e - 1) <= hi)) --e;
    if (e < b) e = b;
    return {b, e};
  }

  /// Rectangular block of cells covered by a cube (clipped to the root).
  struct CellBox {
    std::array<long, max_dimension> begin{};
    std::array<long, max_dimension> end{};
    int n = 0;

    bool empty() const {
      for (int a = 0; a < n; ++a)
        if (begin[a] >= end[a]) return true;
      return false;
    }
    std::size_t count() const {
      if (empty()) return 0;
      std::size_t c = 1;
      for (int a = 0; a < n; ++a) c *= static_cast<std::size_t>(end[a] - begin[a]);
      return c;
    }
  };

  CellBox box(const Cube& q) const {
    CellBox b;
    b.n = dim();
    for (int a = 0; a < dim(); ++a) {
      const AxisRange r = axis_range(a, q.lo(a), q.hi(a));
      b.begin[a] = r.begin;
      b.end[a] = r.end;
    }
    return b;
  }

  template <class F>
  void for_each_in(const CellBox& b, F&& f) const {
    if (b.empty()) return;
    const int n = dim();
    std::array<long, max_dimension> pos{};
    for (int a = 0; a < n; ++a) pos[a] = b.begin[a];
    while (true) {
      std::size_t idx = 0;
      for (int a = 0; a < n; ++a)
        idx = idx * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(pos[a]);
      f(idx);
      int a = n - 1;
      while (a >= 0) {
        if (++pos[a] < b.end[a]) break;
        pos[a] = b.begin[a];
        --a;
      }
      if (a < 0) break;
    }
  }

  std::vector<std::size_t> cells_in(const Cube& q) const {
    std::vector<std::size_t> out;
    const CellBox b = box(q);
    out.reserve(b.count());
    for_each_in(b, [&](std::size_t i) { out.push_back(i); });
    return out;
  }

 private:
  double axis_center(int axis, long i) const {
    return root_.lo(axis) + (static_cast<double>(i) + 0.5) * width_;
  }

  long axis_locate(int axis, double p) const {
    const double base = root_.lo(axis);
    long i = static_cast<long>(std::ceil((p - base) / width_)) - 1;
    for (long k = std::max(0l, i - 1); k <= std::min(per_axis_ - 1, i + 1); ++k) {
      const double lo = base + static_cast<double>(k) * width_;
      if (lo < p && p <= lo + width_) return k;
    }
    return -1;
  }

  Cube root_;
  int level_ = 0;
  long per_axis_ = 1;
  double width_ = 1.0;
  std::size_t count_ = 1;
  std::vector<double> centers_;
};

}  // namespace czlab
