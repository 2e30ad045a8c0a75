#pragma once

#include <functional>
#include <optional>
#include <sstream>

#include "czlab/operators.hpp"

namespace czlab {

/// Whatever identifies the maximizer of a constant estimate: enough to
/// re-evaluate the reported value exactly.
struct Witness {
  std::optional<Cube> cube;
  std::optional<TruncPair> trunc;
  std::vector<int> beta;
  std::vector<double> center;
  double radius = 0.0;
  double eps = 0.0;
  int poly_id = -1;
  int component = 0;
  std::string note;

  std::string describe() const {
    std::ostringstream os;
    bool sep = false;
    auto add = [&](const std::string& s) {
      if (sep) os << "; ";
      os << s;
      sep = true;
    };
    if (cube) add("Q=" + cube->describe());
    if (trunc)
      add("trunc=(" + format_full(trunc->delta) + "," + format_full(trunc->R) + ")");
    if (!beta.empty()) {
      std::string b = "beta=(";
      for (std::size_t i = 0; i < beta.size(); ++i)
        b += (i ? "," : "") + std::to_string(beta[i]);
      add(b + ")");
    }
    if (!center.empty()) {
      std::string c = "x0=(";
      for (std::size_t i = 0; i < center.size(); ++i) c += (i ? "," : "") + format_full(center[i]);
      add(c + ")");
    }
    if (radius > 0.0) add("N=" + format_full(radius));
    if (eps > 0.0) add("eps=" + format_full(eps));
    if (poly_id >= 0) add("poly=" + std::to_string(poly_id));
    if (component > 0) add("component=" + std::to_string(component));
    if (!note.empty()) add(note);
    return os.str();
  }
};

/// A named constant estimate: the maximum over the enumerated search space
/// together with the witness achieving it.
struct ConstantReport {
  std::string name;
  double value = 0.0;
  double alpha = 0.0;
  int kappa = 0;
  int level = 0;
  Witness witness;
};

// ---------------------------------------------------------------------------
// Classical fractional Muckenhoupt constant:
//   A_2^alpha = sup over Q of |Q|_sigma |Q|_omega / |Q|^{2 - 2 alpha / n}.

inline double a2_ratio(const GridMeasure& sigma, const GridMeasure& omega, double alpha,
                       const Cube& q) {
  const int n = sigma.grid().dim();
  const double denom = std::pow(q.volume(), 2.0 - 2.0 * alpha / n);
  return cube_mass(sigma, q) * cube_mass(omega, q) / denom;
}

inline ConstantReport a2_alpha(const GridMeasure& sigma, const GridMeasure& omega, double alpha,
                               const CubeFamily& family) {
  if (!sigma.grid().same_layout(omega.grid()))
    throw invalid_input("a2_alpha: measures must share root and resolution");
  const std::vector<Cube> cubes = enumerate_cubes(family);
  if (cubes.empty()) throw invalid_input("a2_alpha: empty cube family");
  ConstantReport rep;
  rep.name = "A2";
  rep.alpha = alpha;
  rep.level = sigma.grid().level();
  for (const Cube& q : cubes) {
    const double r = a2_ratio(sigma, omega, alpha, q);
    if (r > rep.value) {
      rep.value = r;
      rep.witness.cube = q;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reproducing Poisson integral
//   P^alpha(Q, mu) = integral of ( l / (l + |x - x_Q|)^2 )^{n-alpha} d mu,
// with l = |Q|^{1/n} the side length.

inline double poisson(const Cube& q, const GridMeasure& mu, double alpha) {
  const Grid& g = mu.grid();
  const int n = g.dim();
  if (!(alpha >= 0.0) || !(alpha < static_cast<double>(n)))
    throw invalid_input("poisson: need 0 <= alpha < n");
  const double l = q.side;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double m = mu.mass(i);
    if (m == 0.0) continue;
    const double d = euclidean_distance(g.center(i), q.center);
    acc += m * std::pow(l / sq(l + d), n - alpha);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// One-tailed fractional Muckenhoupt constant:
//   cal A_2^alpha(sigma, omega) = sup over Q of
//       P^alpha(Q, sigma) * |Q|_omega / |Q|^{1 - alpha/n},
// and its dual cal A_2^{alpha,*}(sigma, omega) = cal A_2^alpha(omega, sigma).

inline double one_tailed_ratio(const GridMeasure& sigma, const GridMeasure& omega, double alpha,
                               const Cube& q) {
  const int n = sigma.grid().dim();
  return poisson(q, sigma, alpha) * cube_mass(omega, q) / std::pow(q.volume(), 1.0 - alpha / n);
}

inline ConstantReport one_tailed_a2(const GridMeasure& sigma, const GridMeasure& omega,
                                    double alpha, const CubeFamily& family) {
  if (!sigma.grid().same_layout(omega.grid()))
    throw invalid_input("one_tailed_a2: measures must share root and resolution");
  ConstantReport rep;
  rep.name = "A2_one_tailed";
  rep.alpha = alpha;
  rep.level = sigma.grid().level();
  for (const Cube& q : enumerate_cubes(family)) {
    const double r = one_tailed_ratio(sigma, omega, alpha, q);
    if (r > rep.value) {
      rep.value = r;
      rep.witness.cube = q;
    }
  }
  return rep;
}

inline ConstantReport one_tailed_a2_dual(const GridMeasure& sigma, const GridMeasure& omega,
                                         double alpha, const CubeFamily& family) {
  ConstantReport rep = one_tailed_a2(omega, sigma, alpha, family);
  rep.name = "A2_one_tailed_dual";
  return rep;
}

// ---------------------------------------------------------------------------
// Normalized monomials m_Q^beta(x) = ((x - c_Q) / l(Q))^beta.

inline double monomial(const Cube& q, std::span<const int> beta, std::span<const double> x) {
  double v = 1.0;
  for (int a = 0; a < q.dim(); ++a) v *= ipow((x[a] - q.center[a]) / q.side, beta[a]);
  return v;
}

/// All multiindices with |beta| < kappa, ordered by total degree then
/// lexicographically.
inline std::vector<std::vector<int>> multiindices_below(int n, int kappa) {
  if (kappa < 1) throw invalid_input("multiindices_below: kappa must be >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> beta(n, 0);
  for (int degree = 0; degree < kappa; ++degree) {
    // enumerate all beta >= 0 with |beta| == degree, lexicographically
    std::function<void(int, int)> rec = [&](int axis, int remaining) {
      if (axis == n - 1) {
        beta[axis] = remaining;
        out.push_back(beta);
        return;
      }
      for (int k = 0; k <= remaining; ++k) {
        beta[axis] = k;
        rec(axis + 1, remaining - k);
      }
    };
    rec(0, degree);
  }
  return out;
}

// ---------------------------------------------------------------------------
// kappa-cube polynomial testing:
//   T^{(kappa)}(sigma, omega)^2 = sup over Q, max over |beta| < kappa,
//       (1/|Q|_sigma) * integral over Q of |T_sigma(1_Q m_Q^beta)|^2 d omega,
// with the operator truncations ranging over the ladder and vector kernels
// aggregated by the max over components. The dual constant swaps the
// measures and transposes the kernel.

struct CubeTestingValue {
  double value_sq = 0.0;
  std::vector<int> beta;
  TruncPair trunc;
  int component = 0;
};

inline CubeTestingValue kappa_testing_cube(const Kernel& kernel, const GridMeasure& sigma,
                                           const GridMeasure& omega, int kappa, const Cube& q,
                                           const TruncationLadder& ladder) {
  const Grid& g = sigma.grid();
  const std::vector<std::size_t> cells = g.cells_in(q);
  CubeTestingValue best;
  const double q_sigma = cube_mass(sigma, q);
  if (!(q_sigma > 0.0)) return best;
  std::vector<double> weighted(cells.size());
  for (const auto& beta : multiindices_below(g.dim(), kappa)) {
    for (std::size_t k = 0; k < cells.size(); ++k)
      weighted[k] = monomial(q, beta, g.center(cells[k])) * sigma.mass(cells[k]);
    for (const TruncPair& pair : ladder.pairs()) {
      for (int j = 0; j < kernel.components(); ++j) {
        double sum = 0.0;
        for (std::size_t xk = 0; xk < cells.size(); ++xk) {
          const double wx = omega.mass(cells[xk]);
          if (wx == 0.0) continue;
          const auto x = g.center(cells[xk]);
          double t = 0.0;
          for (std::size_t yk = 0; yk < cells.size(); ++yk) {
            if (weighted[yk] == 0.0) continue;
            const auto y = g.center(cells[yk]);
            const double r = euclidean_distance(x, y);
            if (!pair.active(r)) continue;
            t += kernel.evaluate(j, x, y) * weighted[yk];
          }
          sum += wx * t * t;
        }
        const double v = sum / q_sigma;
        if (v > best.value_sq) {
          best.value_sq = v;
          best.beta = beta;
          best.trunc = pair;
          best.component = j;
        }
      }
    }
  }
  return best;
}

inline ConstantReport kappa_cube_testing(const Kernel& kernel, const GridMeasure& sigma,
                                         const GridMeasure& omega, int kappa,
                                         const CubeFamily& family, const TruncationLadder& ladder) {
  if (!sigma.grid().same_layout(omega.grid()))
    throw invalid_input("kappa_cube_testing: measures must share root and resolution");
  if (kappa < 1) throw invalid_input("kappa_cube_testing: kappa must be >= 1");
  ConstantReport rep;
  rep.name = "kappa_testing";
  rep.alpha = kernel.alpha();
  rep.kappa = kappa;
  rep.level = sigma.grid().level();
  double best_sq = 0.0;
  std::size_t usable = 0;
  for (const Cube& q : enumerate_cubes(family)) {
    if (!(cube_mass(sigma, q) > 0.0)) continue;
    ++usable;
    const CubeTestingValue v = kappa_testing_cube(kernel, sigma, omega, kappa, q, ladder);
    if (v.value_sq > best_sq) {
      best_sq = v.value_sq;
      rep.witness.cube = q;
      rep.witness.beta = v.beta;
      rep.witness.trunc = v.trunc;
      rep.witness.component = v.component;
    }
  }
  if (usable == 0)
    throw degenerate_error("kappa_cube_testing: every cube has zero sigma mass");
  rep.value = std::sqrt(best_sq);
  return rep;
}

inline ConstantReport kappa_cube_testing_dual(const Kernel& kernel, const GridMeasure& sigma,
                                              const GridMeasure& omega, int kappa,
                                              const CubeFamily& family,
                                              const TruncationLadder& ladder) {
  ConstantReport rep = kappa_cube_testing(kernel.adjoint(), omega, sigma, kappa, family, ladder);
  rep.name = "kappa_testing_dual";
  return rep;
}

// ---------------------------------------------------------------------------
// Cancellation constant: the best bound in
//   integral over |x-x0|<N of | integral over eps<|x-y|<N of
//       K(x,y) p(y)/||1_B p||_inf d sigma |^2 d omega
//   <= A * |B(x0,N)|_sigma,
// searched over ball centers, radii, inner truncations, and polynomials of
// degree < kappa (the monomial basis plus random coefficient draws, each
// normalized by its sampled sup norm on the ball). Balls use cell-center
// membership |y - x0| < N, consistent with the cube policy.

struct CancellationSearch {
  std::vector<std::vector<double>> centers;
  std::vector<double> radii;
  std::vector<double> eps_ladder;
  int poly_trials = 8;
  std::uint64_t seed = 1;
};

/// One evaluation of the cancellation ratio for a fixed (x0, N, eps) and a
/// fixed normalized polynomial (given by coefficients on the centered,
/// N-scaled monomial basis). Returns nothing when |B|_sigma = 0 or the
/// polynomial vanishes on the ball.
inline std::optional<double> cancellation_ratio(const Kernel& kernel, const GridMeasure& sigma,
                                                const GridMeasure& omega,
                                                std::span<const std::vector<int>> basis,
                                                std::span<const double> coeff,
                                                std::span<const double> x0, double radius,
                                                double eps, int component) {
  const Grid& g = sigma.grid();
  const int n = g.dim();
  std::vector<std::size_t> ball;
  for (std::size_t i = 0; i < g.cell_count(); ++i)
    if (euclidean_distance(g.center(i), x0) < radius) ball.push_back(i);
  double ball_sigma = 0.0;
  for (std::size_t i : ball) ball_sigma += sigma.mass(i);
  if (!(ball_sigma > 0.0)) return std::nullopt;

  auto poly_at = [&](std::span<const double> y) {
    double v = 0.0;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      double term = coeff[b];
      for (int a = 0; a < n; ++a) term *= ipow((y[a] - x0[a]) / radius, basis[b][a]);
      v += term;
    }
    return v;
  };
  double sup = 0.0;
  for (std::size_t i : ball) sup = std::max(sup, std::abs(poly_at(g.center(i))));
  if (!(sup > 0.0)) return std::nullopt;

  const TruncPair window(eps, radius);
  double outer = 0.0;
  for (std::size_t xi : ball) {
    const double wx = omega.mass(xi);
    if (wx == 0.0) continue;
    const auto x = g.center(xi);
    double inner = 0.0;
    for (std::size_t yi = 0; yi < g.cell_count(); ++yi) {
      const double m = sigma.mass(yi);
      if (m == 0.0) continue;
      const auto y = g.center(yi);
      const double r = euclidean_distance(x, y);
      if (!window.active(r)) continue;
      inner += kernel.evaluate(component, x, y) * (poly_at(y) / sup) * m;
    }
    outer += wx * inner * inner;
  }
  return outer / ball_sigma;
}

inline ConstantReport cancellation_constant(const Kernel& kernel, const GridMeasure& sigma,
                                            const GridMeasure& omega, int kappa,
                                            const CancellationSearch& search) {
  if (!sigma.grid().same_layout(omega.grid()))
    throw invalid_input("cancellation_constant: measures must share root and resolution");
  if (kappa < 1) throw invalid_input("cancellation_constant: kappa must be >= 1");
  const double w = sigma.grid().cell_width();
  for (double e : search.eps_ladder)
    if (e < w) throw invalid_input("cancellation_constant: eps below one cell width");
  const int n = sigma.grid().dim();
  const auto basis = multiindices_below(n, kappa);

  // polynomial catalogue: each basis monomial, then random coefficient draws
  std::vector<std::vector<double>> polys;
  for (std::size_t b = 0; b < basis.size(); ++b) {
    std::vector<double> c(basis.size(), 0.0);
    c[b] = 1.0;
    polys.push_back(std::move(c));
  }
  for (int t = 0; t < search.poly_trials; ++t) {
    auto rng = seeded_rng(search.seed, "cancel-poly", static_cast<std::uint64_t>(t));
    std::vector<double> c(basis.size());
    for (double& v : c) v = uniform_double(rng, -1.0, 1.0);
    polys.push_back(std::move(c));
  }

  ConstantReport rep;
  rep.name = "cancellation";
  rep.alpha = kernel.alpha();
  rep.kappa = kappa;
  rep.level = sigma.grid().level();
  bool any = false;
  for (const auto& x0 : search.centers) {
    if (static_cast<int>(x0.size()) != n)
      throw invalid_input("cancellation_constant: center dimension mismatch");
    for (double radius : search.radii) {
      for (double eps : search.eps_ladder) {
        if (!(eps < radius)) continue;
        for (std::size_t p = 0; p < polys.size(); ++p) {
          for (int j = 0; j < kernel.components(); ++j) {
            const auto v = cancellation_ratio(kernel, sigma, omega, basis, polys[p], x0, radius,
                                              eps, j);
            if (!v) continue;
            any = true;
            if (*v > rep.value) {
              rep.value = *v;
              rep.witness.center = x0;
              rep.witness.radius = radius;
              rep.witness.eps = eps;
              rep.witness.poly_id = static_cast<int>(p);
              rep.witness.component = j;
            }
          }
        }
      }
    }
  }
  if (!any)
    throw degenerate_error("cancellation_constant: every (center, radius, eps) combination "
                           "was skipped (no sigma mass or vanishing polynomials)");
  return rep;
}

inline ConstantReport cancellation_constant_dual(const Kernel& kernel, const GridMeasure& sigma,
                                                 const GridMeasure& omega, int kappa,
                                                 const CancellationSearch& search) {
  ConstantReport rep = cancellation_constant(kernel.adjoint(), omega, sigma, kappa, search);
  rep.name = "cancellation_dual";
  return rep;
}

}  // namespace czlab
