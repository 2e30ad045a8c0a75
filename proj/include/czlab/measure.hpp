#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <utility>

#include "czlab/geometry.hpp"

namespace czlab {

/// Nonnegative cell-atomic measure on a uniform grid: one mass per cell,
/// mass units (not density). |Q|_mu for any cube is the sum of masses of
/// cells whose centers lie in Q. Immutable after construction; prefix sums
/// for box queries are built once here.
class GridMeasure {
 public:
  GridMeasure(Grid grid, std::vector<double> masses)
      : grid_(std::move(grid)), mass_(std::move(masses)) {
    if (mass_.size() != grid_.cell_count())
      throw invalid_input("grid measure: need one mass per cell");
    for (double m : mass_)
      if (!(m >= 0.0) || !std::isfinite(m))
        throw invalid_input("grid measure: masses must be finite and >= 0");
    build_prefix();
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> masses() const { return mass_; }
  double mass(std::size_t cell) const { return mass_[cell]; }
  double total() const { return total_; }

  GridMeasure scaled(double c) const {
    if (!(c >= 0.0) || !std::isfinite(c)) throw invalid_input("scaled: factor must be >= 0");
    std::vector<double> m(mass_);
    for (double& v : m) v *= c;
    return GridMeasure(grid_, std::move(m));
  }

  /// Total mass of a rectangular cell block. O(1) for n <= 2 via
  /// summed-area tables, direct loop otherwise.
  double box_mass(const Grid::CellBox& b) const {
    if (b.empty()) return 0.0;
    const int n = grid_.dim();
    if (n == 1) return prefix_[static_cast<std::size_t>(b.end[0])] -
                       prefix_[static_cast<std::size_t>(b.begin[0])];
    if (n == 2) {
      const std::size_t p = static_cast<std::size_t>(grid_.cells_per_axis()) + 1;
      auto s = [&](long i, long j) {
        return prefix_[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
      };
      return s(b.end[0], b.end[1]) - s(b.begin[0], b.end[1]) - s(b.end[0], b.begin[1]) +
             s(b.begin[0], b.begin[1]);
    }
    double sum = 0.0;
    grid_.for_each_in(b, [&](std::size_t i) { sum += mass_[i]; });
    return sum;
  }

 private:
  void build_prefix() {
    const int n = grid_.dim();
    total_ = std::accumulate(mass_.begin(), mass_.end(), 0.0);
    if (n == 1) {
      prefix_.assign(mass_.size() + 1, 0.0);
      for (std::size_t i = 0; i < mass_.size(); ++i) prefix_[i + 1] = prefix_[i] + mass_[i];
    } else if (n == 2) {
      const std::size_t p = static_cast<std::size_t>(grid_.cells_per_axis());
      prefix_.assign((p + 1) * (p + 1), 0.0);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
          prefix_[(i + 1) * (p + 1) + (j + 1)] = mass_[i * p + j] +
                                                 prefix_[i * (p + 1) + (j + 1)] +
                                                 prefix_[(i + 1) * (p + 1) + j] -
                                                 prefix_[i * (p + 1) + j];
    }
  }

  Grid grid_;
  std::vector<double> mass_;
  std::vector<double> prefix_;
  double total_ = 0.0;
};

/// |Q|_mu: sum of masses of cells with centers in Q. Cubes reaching outside
/// the root are clipped; `clipped`, when given, reports that this happened.
inline double cube_mass(const GridMeasure& mu, const Cube& q, bool* clipped = nullptr) {
  if (clipped) *clipped = !mu.grid().root().contains_cube(q);
  return mu.box_mass(mu.grid().box(q));
}

/// Midpoint-rule discretization: mass per cell = f(cell center) * cell
/// volume. The density must be finite and nonnegative at every center.
template <class F>
GridMeasure from_density(F&& f, const Cube& root, int level) {
  Grid g(root, level);
  const double vol = g.cell_volume();
  std::vector<double> m(g.cell_count());
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double d = f(g.center(i));
    if (!std::isfinite(d) || d < 0.0)
      throw invalid_input("from_density: density must be finite and >= 0 at cell centers");
    m[i] = d * vol;
  }
  return GridMeasure(std::move(g), std::move(m));
}

inline GridMeasure lebesgue_measure(const Cube& root, int level) {
  return from_density([](std::span<const double>) { return 1.0; }, root, level);
}

// ---------------------------------------------------------------------------
// Doubling diagnostic: C_doub = max over tested cubes of |2Q|_mu / |Q|_mu,
// restricted to cubes with positive mass and 2Q inside the root. This is a
// supremum over the finite family, not a certified global property.

struct DoublingStats {
  double c_doub = 1.0;
  double theta = 0.0;  // log2(c_doub)
  Cube witness;
  std::size_t tested = 0;
};

inline DoublingStats doubling_stats(const GridMeasure& mu, const CubeFamily& family) {
  DoublingStats stats;
  bool any = false;
  for (const Cube& q : enumerate_cubes(family)) {
    const Cube q2 = dilate(q, 2.0);
    if (!mu.grid().root().contains_cube(q2)) continue;
    const double m = cube_mass(mu, q);
    if (!(m > 0.0)) continue;
    const double ratio = cube_mass(mu, q2) / m;
    ++stats.tested;
    if (!any || ratio > stats.c_doub) {
      stats.c_doub = ratio;
      stats.witness = q;
      any = true;
    }
  }
  if (!any)
    throw degenerate_error("doubling_stats: no cube with positive mass and 2Q inside the root");
  stats.theta = std::log2(stats.c_doub);
  return stats;
}

// ---------------------------------------------------------------------------
// A_infinity diagnostic: fit the smallest c such that
//   |E|_omega / |Q|_omega <= c * (|E| / |Q|)^epsilon
// over a grid of candidate epsilon, testing superlevel sets of the cell
// density (the extremal candidates for fixed |E|) plus random cell unions
// for falsification.

struct AInfinityReport {
  double epsilon = 0.0;
  double c_reform = 0.0;
  Cube worst_cube;
  std::vector<std::size_t> worst_cells;
  std::string worst_description;
};

inline AInfinityReport a_infinity_report(const GridMeasure& omega, const GridMeasure& lebesgue,
                                         const CubeFamily& family, int n_random_sets,
                                         std::uint64_t seed = 1) {
  if (!omega.grid().same_layout(lebesgue.grid()))
    throw invalid_input("a_infinity_report: measures must share root and resolution");
  constexpr int n_eps = 19;  // 0.05, 0.10, ..., 0.95
  std::array<double, n_eps> eps_grid{};
  for (int k = 0; k < n_eps; ++k) eps_grid[k] = 0.05 * (k + 1);

  struct Candidate {
    double c = 0.0;
    Cube cube;
    std::vector<std::size_t> cells;
    std::string description;
  };
  std::array<Candidate, n_eps> best{};
  bool any_cube = false;

  const std::vector<Cube> cubes = enumerate_cubes(family);
  std::vector<std::size_t> cells;
  std::vector<std::size_t> order;
  for (std::size_t qi = 0; qi < cubes.size(); ++qi) {
    const Cube& q = cubes[qi];
    const double qw = cube_mass(omega, q);
    const double ql = cube_mass(lebesgue, q);
    if (!(qw > 0.0) || !(ql > 0.0)) continue;
    any_cube = true;
    cells = omega.grid().cells_in(q);

    auto scan = [&](const std::vector<std::size_t>& e_cells, const char* what) {
      double ew = 0.0, el = 0.0;
      for (std::size_t c : e_cells) {
        ew += omega.mass(c);
        el += lebesgue.mass(c);
      }
      if (!(el > 0.0)) return;
      const double rw = ew / qw;
      const double rl = el / ql;
      for (int k = 0; k < n_eps; ++k) {
        const double c = rw / std::pow(rl, eps_grid[k]);
        if (c > best[k].c) {
          best[k].c = c;
          best[k].cube = q;
          best[k].cells = e_cells;
          best[k].description = what;
        }
      }
    };

    // Superlevel sets of the cell density: prefixes of the cells sorted by
    // mass descending (stable on ties for determinism).
    order.assign(cells.begin(), cells.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return omega.mass(a) > omega.mass(b);
    });
    std::vector<std::size_t> prefix;
    prefix.reserve(order.size());
    for (std::size_t c : order) {
      prefix.push_back(c);
      scan(prefix, "superlevel");
    }

    auto rng = seeded_rng(seed, "ainf", qi);
    for (int t = 0; t < n_random_sets; ++t) {
      std::vector<std::size_t> e_cells;
      for (int attempt = 0; attempt < 64 && e_cells.empty(); ++attempt) {
        for (std::size_t c : cells)
          if (rng() & 1) e_cells.push_back(c);
      }
      if (e_cells.empty()) e_cells.push_back(cells.front());
      scan(e_cells, "random");
    }
  }
  if (!any_cube) throw degenerate_error("a_infinity_report: no cube carries omega mass");

  // Smallest c wins; ties (to 1e-12 relative) go to the larger epsilon.
  int pick = 0;
  for (int k = 1; k < n_eps; ++k) {
    if (best[k].c < best[pick].c * (1.0 - 1e-12))
      pick = k;
    else if (best[k].c <= best[pick].c * (1.0 + 1e-12))
      pick = k;  // tie: larger epsilon
  }
  AInfinityReport report;
  report.epsilon = eps_grid[pick];
  report.c_reform = best[pick].c;
  report.worst_cube = best[pick].cube;
  report.worst_cells = best[pick].cells;
  report.worst_description = best[pick].description + std::string(" set of ") +
                             std::to_string(best[pick].cells.size()) + " cells in " +
                             best[pick].cube.describe();
  return report;
}

// ---------------------------------------------------------------------------
// Flat text serialization, shared by measures and sampled functions:
// header (dimension, root center, root side, level), then one value per
// line. Values are written with 17 significant digits so round-trips are
// bit-exact.

namespace detail {

inline void save_grid_values(std::ostream& os, const Grid& grid, std::span<const double> values,
                             std::string_view tag) {
  os << "czlab-" << tag << " 1\n";
  os << "n " << grid.dim() << "\n";
  os << "center";
  for (int a = 0; a < grid.dim(); ++a) os << " " << format_full(grid.root().center[a]);
  os << "\n";
  os << "side " << format_full(grid.root().side) << "\n";
  os << "level " << grid.level() << "\n";
  os << "values " << values.size() << "\n";
  for (double v : values) os << format_full(v) << "\n";
}

inline std::pair<Grid, std::vector<double>> load_grid_values(std::istream& is,
                                                             std::string_view tag) {
  std::string word;
  auto expect = [&](std::string_view want) {
    if (!(is >> word) || word != want)
      throw invalid_input("grid file: expected '" + std::string(want) + "'");
  };
  expect(std::string("czlab-") + std::string(tag));
  expect("1");
  expect("n");
  int n = 0;
  if (!(is >> n) || n < 1 || n > max_dimension) throw invalid_input("grid file: bad dimension");
  expect("center");
  std::vector<double> center(n);
  for (double& c : center)
    if (!(is >> c)) throw invalid_input("grid file: bad center");
  expect("side");
  double side = 0.0;
  if (!(is >> side)) throw invalid_input("grid file: bad side");
  expect("level");
  int level = 0;
  if (!(is >> level)) throw invalid_input("grid file: bad level");
  expect("values");
  std::size_t count = 0;
  if (!(is >> count)) throw invalid_input("grid file: bad value count");
  Grid grid(Cube(std::move(center), side), level);
  if (count != grid.cell_count()) throw invalid_input("grid file: value count mismatch");
  std::vector<double> values(count);
  for (double& v : values)
    if (!(is >> v)) throw invalid_input("grid file: too few values");
  return {std::move(grid), std::move(values)};
}

}  // namespace detail

inline void save_measure(const GridMeasure& mu, std::ostream& os) {
  detail::save_grid_values(os, mu.grid(), mu.masses(), "measure");
}

inline GridMeasure load_measure(std::istream& is) {
  auto [grid, values] = detail::load_grid_values(is, "measure");
  return GridMeasure(std::move(grid), std::move(values));
}

inline void save_measure_file(const GridMeasure& mu, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw invalid_input("cannot open for writing: " + path);
  save_measure(mu, os);
}

inline GridMeasure load_measure_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw invalid_input("cannot open measure file: " + path);
  return load_measure(is);
}

}  // namespace czlab
