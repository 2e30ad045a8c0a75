// Independent reference computations used by the unit and acceptance
// suites. These deliberately avoid the library's optimized code paths:
// subset maxima are found by exhaustive enumeration, spectra by dense
// Jacobi iteration, integrals by brute-force refinement.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "czlab/czlab.hpp"

namespace oracles {

/// max over nonempty subsets S (with positive weight) of
/// |sum_S g w| / sqrt(sum_S w), by walking all 2^m - 1 subsets.
inline double brute_force_level_set(const std::vector<double>& g, const std::vector<double>& w) {
  const std::size_t m = g.size();
  double best = -1.0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    double s = 0.0, weight = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        s += g[i] * w[i];
        weight += w[i];
      }
    if (weight > 0.0) best = std::max(best, std::abs(s) / std::sqrt(weight));
  }
  return best;
}

/// Exhaustive restricted-weak-type maximum over all pairs of nonempty cell
/// subsets (E, F) of one cube, given the truncated kernel matrix
/// k[x][y] (already including the cutoff), the sigma masses, and the omega
/// masses: max |sum_{x in F} omega_x sum_{y in E} k[x][y] sigma_y|
///            / sqrt(|E|_sigma |F|_omega).
inline double joint_ef_enumeration(const std::vector<std::vector<double>>& k,
                                   const std::vector<double>& sigma,
                                   const std::vector<double>& omega) {
  const std::size_t m = sigma.size();
  double best = 0.0;
  std::vector<double> t(m);
  for (std::uint32_t e = 1; e < (1u << m); ++e) {
    double e_sigma = 0.0;
    for (std::size_t y = 0; y < m; ++y)
      if (e & (1u << y)) e_sigma += sigma[y];
    if (!(e_sigma > 0.0)) continue;
    for (std::size_t x = 0; x < m; ++x) {
      t[x] = 0.0;
      for (std::size_t y = 0; y < m; ++y)
        if (e & (1u << y)) t[x] += k[x][y] * sigma[y];
    }
    for (std::uint32_t f = 1; f < (1u << m); ++f) {
      double s = 0.0, f_omega = 0.0;
      for (std::size_t x = 0; x < m; ++x)
        if (f & (1u << x)) {
          s += t[x] * omega[x];
          f_omega += omega[x];
        }
      if (!(f_omega > 0.0)) continue;
      best = std::max(best, std::abs(s) / std::sqrt(e_sigma * f_omega));
    }
  }
  return best;
}

/// Same enumeration with the bilinear indicator/cube normalization
/// sqrt(|Q|_sigma |Q|_omega).
inline double joint_ef_enumeration_bict(const std::vector<std::vector<double>>& k,
                                        const std::vector<double>& sigma,
                                        const std::vector<double>& omega) {
  const std::size_t m = sigma.size();
  double q_sigma = 0.0, q_omega = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    q_sigma += sigma[i];
    q_omega += omega[i];
  }
  if (!(q_sigma > 0.0) || !(q_omega > 0.0)) return 0.0;
  double best = 0.0;
  std::vector<double> t(m);
  for (std::uint32_t e = 1; e < (1u << m); ++e) {
    for (std::size_t x = 0; x < m; ++x) {
      t[x] = 0.0;
      for (std::size_t y = 0; y < m; ++y)
        if (e & (1u << y)) t[x] += k[x][y] * sigma[y];
    }
    for (std::uint32_t f = 1; f < (1u << m); ++f) {
      double s = 0.0;
      for (std::size_t x = 0; x < m; ++x)
        if (f & (1u << x)) s += t[x] * omega[x];
      best = std::max(best, std::abs(s));
    }
  }
  return best / std::sqrt(q_sigma * q_omega);
}

/// Largest eigenvalue of a dense symmetric matrix by cyclic Jacobi
/// rotations.
inline double jacobi_max_eigenvalue(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
      }
  }
  double best = a[0][0];
  for (std::size_t i = 1; i < n; ++i) best = std::max(best, a[i][i]);
  return best;
}

/// Largest singular value of the weighted operator with matrix
/// k[x][y] sigma_y, as a map L^2(sigma) -> L^2(omega): eigenvalues of
/// G^T G with G = diag(sqrt(omega)) K diag(sqrt(sigma)).
inline double dense_weighted_operator_norm(const std::vector<std::vector<double>>& k,
                                           const std::vector<double>& sigma,
                                           const std::vector<double>& omega) {
  const std::size_t n = sigma.size();
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      g[x][y] = std::sqrt(omega[x]) * k[x][y] * std::sqrt(sigma[y]);
  std::vector<std::vector<double>> gtg(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t x = 0; x < n; ++x) s += g[x][i] * g[x][j];
      gtg[i][j] = s;
    }
  return std::sqrt(std::max(0.0, jacobi_max_eigenvalue(std::move(gtg))));
}

/// Poisson tail of a density by brute-force fine midpoint quadrature over
/// the root (2^fine_level cells per axis).
template <class Density>
double fine_poisson(const czlab::Cube& q, Density&& density, const czlab::Cube& root,
                    int fine_level, double alpha) {
  const czlab::Grid fine(root, fine_level);
  const int n = fine.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < fine.cell_count(); ++i) {
    const auto y = fine.center(i);
    const double d = czlab::euclidean_distance(y, q.center);
    acc += density(y) * fine.cell_volume() *
           std::pow(q.side / czlab::sq(q.side + d), n - alpha);
  }
  return acc;
}

/// Independent re-count of the shifted dyadic family: nested loops over
/// levels, shifts, and positions with a containment test written from
/// scratch.
inline std::size_t independent_family_count(const czlab::Cube& root, int max_level,
                                            bool half_shifts) {
  const int n = root.dim();
  std::size_t count = 0;
  for (int level = 0; level <= max_level; ++level) {
    const double side = root.side / std::pow(2.0, level);
    const long cells = 1l << level;
    const int shifts = half_shifts ? (1 << n) : 1;
    for (int sh = 0; sh < shifts; ++sh) {
      std::vector<long> pos(n, 0);
      bool done = false;
      while (!done) {
        bool inside = true;
        for (int a = 0; a < n; ++a) {
          const double off = (sh >> a) & 1 ? 0.5 * side : 0.0;
          const double lo = (root.center[a] - 0.5 * root.side) + pos[a] * side + off;
          const double hi = lo + side;
          if (lo < root.center[a] - 0.5 * root.side - 1e-12 ||
              hi > root.center[a] + 0.5 * root.side + 1e-12)
            inside = false;
        }
        if (inside) ++count;
        int a = n - 1;
        while (a >= 0 && ++pos[a] == cells) pos[a--] = 0;
        done = a < 0;
      }
    }
  }
  return count;
}

/// Random nonnegative masses, some exactly zero.
inline std::vector<double> random_masses(std::mt19937_64& rng, std::size_t count,
                                         double zero_fraction = 0.2) {
  std::vector<double> m(count);
  for (double& v : m)
    v = czlab::unit_double(rng) < zero_fraction ? 0.0 : czlab::uniform_double(rng, 0.05, 2.0);
  return m;
}

/// Truncated kernel matrix for one cube's cells, built directly.
inline std::vector<std::vector<double>> truncated_kernel_matrix(const czlab::Kernel& kernel,
                                                                const czlab::Grid& grid,
                                                                const std::vector<std::size_t>& cells,
                                                                czlab::TruncPair pair,
                                                                int component = 0) {
  const std::size_t m = cells.size();
  std::vector<std::vector<double>> k(m, std::vector<double>(m, 0.0));
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y) {
      const double r =
          czlab::euclidean_distance(grid.center(cells[x]), grid.center(cells[y]));
      if (r >= pair.delta && r < pair.R)
        k[x][y] = kernel.evaluate(component, grid.center(cells[x]), grid.center(cells[y]));
    }
  return k;
}

}  // namespace oracles
