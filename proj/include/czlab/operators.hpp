#pragma once

#include <utility>

#include "czlab/kernel.hpp"
#include "czlab/measure.hpp"

namespace czlab {

/// A function sampled at the cell centers of a grid, aligned with the cell
/// ordering of the partition.
struct GridFunction {
  Grid grid;
  std::vector<double> value;

  GridFunction(Grid g, std::vector<double> v) : grid(std::move(g)), value(std::move(v)) {
    if (value.size() != grid.cell_count())
      throw invalid_input("grid function: need one value per cell");
    for (double x : value)
      if (!std::isfinite(x)) throw invalid_input("grid function: values must be finite");
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : value) m = std::max(m, std::abs(x));
    return m;
  }
};

inline GridFunction constant_function(const Grid& grid, double c) {
  return GridFunction(grid, std::vector<double>(grid.cell_count(), c));
}

inline GridFunction indicator_function(const Grid& grid, std::span<const std::size_t> cells) {
  std::vector<double> v(grid.cell_count(), 0.0);
  for (std::size_t c : cells) v[c] = 1.0;
  return GridFunction(grid, std::move(v));
}

/// Indicator of the cube: cells whose centers lie in Q.
inline GridFunction indicator_function(const Grid& grid, const Cube& q) {
  std::vector<double> v(grid.cell_count(), 0.0);
  grid.for_each_in(grid.box(q), [&](std::size_t i) { v[i] = 1.0; });
  return GridFunction(grid, std::move(v));
}

inline void save_function(const GridFunction& f, std::ostream& os) {
  detail::save_grid_values(os, f.grid, f.value, "function");
}

inline GridFunction load_function(std::istream& is) {
  auto [grid, values] = detail::load_grid_values(is, "function");
  return GridFunction(std::move(grid), std::move(values));
}

namespace detail {

inline void require_aligned(const Grid& a, const Grid& b, const char* who) {
  if (!a.same_layout(b)) throw invalid_input(std::string(who) + ": grids are not aligned");
}

}  // namespace detail

/// Truncated singular integral T_{delta,R}(f sigma) sampled at cell
/// centers: out(x) = sum over cells y with delta <= |x-y| < R of
/// K_j(x,y) f(y) sigma(y). The cell containing x contributes nothing since
/// |x-y| = 0 < delta whenever delta > 0.
inline GridFunction apply_truncated(const Kernel& kernel, int j, const GridFunction& f,
                                    const GridMeasure& sigma, const TruncPair& pair) {
  detail::require_aligned(f.grid, sigma.grid(), "apply_truncated");
  const Grid& g = f.grid;
  const std::size_t n_cells = g.cell_count();
  std::vector<double> out(n_cells, 0.0);
  std::span<const double> mass = sigma.masses();
  for (std::size_t xi = 0; xi < n_cells; ++xi) {
    const auto x = g.center(xi);
    double acc = 0.0;
    for (std::size_t yi = 0; yi < n_cells; ++yi) {
      const double fm = f.value[yi] * mass[yi];
      if (fm == 0.0) continue;
      const auto y = g.center(yi);
      const double r = euclidean_distance(x, y);
      if (!pair.active(r)) continue;
      acc += kernel.evaluate(j, x, y) * fm;
    }
    out[xi] = acc;
  }
  return GridFunction(g, std::move(out));
}

/// Maximal truncation T_flat(f sigma): pointwise max over kernel components
/// and over ladder windows of |T_{delta,R}(f sigma)|. Monotone nondecreasing
/// as the ladder grows.
inline GridFunction maximal_truncation(const Kernel& kernel, const GridFunction& f,
                                       const GridMeasure& sigma, const TruncationLadder& ladder) {
  detail::require_aligned(f.grid, sigma.grid(), "maximal_truncation");
  std::vector<double> out(f.grid.cell_count(), 0.0);
  for (int j = 0; j < kernel.components(); ++j) {
    for (const TruncPair& pair : ladder.pairs()) {
      GridFunction t = apply_truncated(kernel, j, f, sigma, pair);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::abs(t.value[i]));
    }
  }
  return GridFunction(f.grid, std::move(out));
}

/// Fractional Hardy-Littlewood maximal operator over a cube family:
/// M^alpha(f sigma)(x) = max over Q in the family containing x of
/// |Q|^{alpha/n - 1} * integral over Q of |f| d sigma.
inline GridFunction fractional_maximal(const GridFunction& f, const GridMeasure& sigma,
                                       const CubeFamily& family, double alpha) {
  detail::require_aligned(f.grid, sigma.grid(), "fractional_maximal");
  const int n = f.grid.dim();
  if (!(alpha >= 0.0) || !(alpha < static_cast<double>(n)))
    throw invalid_input("fractional_maximal: need 0 <= alpha < n");
  const Grid& g = f.grid;
  std::vector<double> out(g.cell_count(), 0.0);
  std::span<const double> mass = sigma.masses();
  for (const Cube& q : enumerate_cubes(family)) {
    const Grid::CellBox b = g.box(q);
    double integral = 0.0;
    g.for_each_in(b, [&](std::size_t i) { integral += std::abs(f.value[i]) * mass[i]; });
    if (integral == 0.0) continue;
    const double avg = std::pow(q.volume(), alpha / n - 1.0) * integral;
    g.for_each_in(b, [&](std::size_t i) { out[i] = std::max(out[i], avg); });
  }
  return GridFunction(g, std::move(out));
}

/// Dyadic variant: same supremum restricted to the unshifted dyadic cubes
/// of the root; pointwise below fractional_maximal over any family that
/// contains those cubes.
inline GridFunction dyadic_maximal(const GridFunction& f, const GridMeasure& sigma, int max_level,
                                   double alpha) {
  return fractional_maximal(f, sigma, CubeFamily(f.grid.root(), max_level, false), alpha);
}

/// Fractional integral I^alpha nu(x) = integral of |x-y|^{alpha-n} d nu(y),
/// 0 < alpha < n. Off-diagonal cells use the center distance; the cell
/// containing x contributes nu(cell) * (w/2)^{alpha-n}, a representative
/// distance of half a cell width that keeps the quadrature first order.
inline double fractional_integral(const GridMeasure& nu, double alpha,
                                  std::span<const double> x) {
  const Grid& g = nu.grid();
  const int n = g.dim();
  if (!(alpha > 0.0) || !(alpha < static_cast<double>(n)))
    throw invalid_input("fractional_integral: need 0 < alpha < n (alpha = 0 has no absolutely "
                        "convergent integral; use the maximal truncation path)");
  const auto own = g.locate(x);
  double acc = 0.0;
  for (std::size_t yi = 0; yi < g.cell_count(); ++yi) {
    const double m = nu.mass(yi);
    if (m == 0.0) continue;
    if (own && *own == yi) {
      acc += m * std::pow(0.5 * g.cell_width(), alpha - n);
      continue;
    }
    const double r = euclidean_distance(x, g.center(yi));
    acc += m * std::pow(r, alpha - n);
  }
  return acc;
}

/// I^alpha nu sampled at every cell center of nu's grid.
inline GridFunction fractional_integral_field(const GridMeasure& nu, double alpha) {
  const Grid& g = nu.grid();
  std::vector<double> out(g.cell_count());
  for (std::size_t i = 0; i < g.cell_count(); ++i) out[i] = fractional_integral(nu, alpha, g.center(i));
  return GridFunction(g, std::move(out));
}

}  // namespace czlab
