#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "czlab/geometry.hpp"

namespace czlab {

/// One truncation window. The active region is delta <= |x-y| < R: the
/// inner edge is inclusive so that delta equal to the grid cell width keeps
/// nearest-neighbour interactions while always dropping the diagonal.
struct TruncPair {
  double delta = 0.0;
  double R = 1.0;

  TruncPair() = default;
  TruncPair(double d, double r) : delta(d), R(r) {
    if (!(delta >= 0.0) || !(R > delta))
      throw invalid_input("truncation pair: need 0 <= delta < R");
  }
  bool active(double r) const { return r >= delta && r < R; }
};

/// Finite set of truncation windows on dyadic scales, the discrete proxy
/// for the family {0 < delta < R < infinity}. Grid-derived factories clamp
/// delta to one cell width, below which the quadrature resolves nothing.
class TruncationLadder {
 public:
  explicit TruncationLadder(std::vector<TruncPair> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw invalid_input("truncation ladder: must be nonempty");
    std::sort(pairs_.begin(), pairs_.end(), [](const TruncPair& a, const TruncPair& b) {
      return a.delta != b.delta ? a.delta < b.delta : a.R < b.R;
    });
  }

  static TruncationLadder single(double delta, double R) {
    return TruncationLadder({TruncPair(delta, R)});
  }

  /// One window spanning every resolvable scale of the grid.
  static TruncationLadder maximal(const Grid& grid) {
    return single(grid.cell_width(), outer_radius(grid));
  }

  /// delta fixed at one cell width, R sweeping the dyadic scales.
  static TruncationLadder nested(const Grid& grid) {
    const double w = grid.cell_width();
    std::vector<TruncPair> p;
    for (double r = 2.0 * w; r < 2.0 * outer_radius(grid); r *= 2.0) p.emplace_back(w, r);
    return TruncationLadder(std::move(p));
  }

  /// All dyadic pairs (w 2^i, w 2^j), i < j, up to just past the diameter.
  static TruncationLadder full(const Grid& grid) {
    const double w = grid.cell_width();
    std::vector<double> scales;
    for (double s = w; s < 2.0 * outer_radius(grid); s *= 2.0) scales.push_back(s);
    std::vector<TruncPair> p;
    for (std::size_t i = 0; i < scales.size(); ++i)
      for (std::size_t j = i + 1; j < scales.size(); ++j) p.emplace_back(scales[i], scales[j]);
    return TruncationLadder(std::move(p));
  }

  std::span<const TruncPair> pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  const TruncPair& widest() const { return pairs_.back(); }

 private:
  static double outer_radius(const Grid& grid) {
    double r = grid.cell_width();
    while (r <= grid.diameter()) r *= 2.0;
    return r;
  }

  std::vector<TruncPair> pairs_;
};

/// An alpha-fractional kernel (possibly vector valued) with its declared
/// constants. Built-ins: the Hilbert kernel 1/(x-y) on the line, the Riesz
/// vector (x_j-y_j)/|x-y|^{n+1}, and the positive fractional kernel
/// |x-y|^{alpha-n}. A constant kernel K == 1 and the zero kernel are
/// provided as test stubs; they are not Calderon-Zygmund kernels.
class Kernel {
 public:
  enum class Family { hilbert, riesz, fractional, constant, zero };

  static Kernel hilbert() {
    Kernel k(Family::hilbert, 1, 0.0);
    k.components_ = 1;
    k.holder_ = 1.0;
    k.c_cz_ = 2.0;
    k.l2_bounded_ = true;
    return k;
  }

  static Kernel riesz(int n) {
    if (n < 1) throw invalid_input("riesz kernel: dimension must be >= 1");
    Kernel k(Family::riesz, n, 0.0);
    k.components_ = n;
    k.holder_ = 1.0;
    k.c_cz_ = static_cast<double>(n + 2) * ipow(2.0, n + 1);
    k.l2_bounded_ = true;
    return k;
  }

  static Kernel fractional(double alpha, int n) {
    if (n < 1) throw invalid_input("fractional kernel: dimension must be >= 1");
    if (!(alpha > 0.0) || !(alpha < static_cast<double>(n)))
      throw invalid_input("fractional kernel: need 0 < alpha < n");
    Kernel k(Family::fractional, n, alpha);
    k.components_ = 1;
    k.holder_ = 1.0;
    k.c_cz_ = std::max(1.0, (n - alpha) * std::pow(2.0, n + 1 - alpha));
    k.l2_bounded_ = false;
    return k;
  }

  static Kernel constant(int n) {
    Kernel k(Family::constant, n, 0.0);
    k.components_ = 1;
    k.holder_ = 1.0;
    k.c_cz_ = std::numeric_limits<double>::infinity();
    k.l2_bounded_ = true;  // desk-scale stub on a bounded root
    return k;
  }

  static Kernel zero(int n) {
    Kernel k(Family::zero, n, 0.0);
    k.components_ = 1;
    k.holder_ = 1.0;
    k.c_cz_ = 0.0;
    k.l2_bounded_ = true;
    return k;
  }

  /// Config-facing selection: "hilbert" | "riesz" | "fractional:alpha"
  /// (plus the "constant" / "zero" stubs).
  static Kernel parse(std::string_view name, int n) {
    if (name == "hilbert") {
      if (n != 1) throw invalid_input("kernel 'hilbert' requires dimension 1");
      return hilbert();
    }
    if (name == "riesz") return riesz(n);
    if (name == "constant") return constant(n);
    if (name == "zero") return zero(n);
    constexpr std::string_view prefix = "fractional:";
    if (name.substr(0, prefix.size()) == prefix) {
      const std::string arg(name.substr(prefix.size()));
      try {
        std::size_t used = 0;
        const double a = std::stod(arg, &used);
        if (used != arg.size()) throw std::invalid_argument(arg);
        return fractional(a, n);
      } catch (const std::logic_error&) {
        throw invalid_input("kernel: cannot parse fractional order in '" + std::string(name) + "'");
      }
    }
    throw invalid_input("unknown kernel '" + std::string(name) +
                        "' (expected hilbert | riesz | fractional:alpha)");
  }

  Family family() const { return family_; }
  int dim() const { return n_; }
  int components() const { return components_; }
  double alpha() const { return alpha_; }
  double holder_exponent() const { return holder_; }
  double cz_constant() const { return c_cz_; }
  int kappa1() const { return kappa1_; }
  int kappa2() const { return kappa2_; }
  bool l2_bounded() const { return l2_bounded_; }
  bool transposed() const { return transposed_; }

  /// The adjoint kernel K*(x,y) = K(y,x).
  Kernel adjoint() const {
    Kernel k(*this);
    k.transposed_ = !k.transposed_;
    return k;
  }

  std::string name() const {
    std::string base;
    switch (family_) {
      case Family::hilbert: base = "hilbert"; break;
      case Family::riesz: base = "riesz"; break;
      case Family::fractional: base = "fractional:" + format_full(alpha_); break;
      case Family::constant: base = "constant"; break;
      case Family::zero: base = "zero"; break;
    }
    return transposed_ ? base + "*" : base;
  }

  double evaluate(int j, std::span<const double> x, std::span<const double> y) const {
    if (transposed_) std::swap(x, y);
    switch (family_) {
      case Family::hilbert:
        if (x[0] == y[0]) throw singular_evaluation("hilbert kernel evaluated at x == y");
        return 1.0 / (x[0] - y[0]);
      case Family::riesz: {
        const double r = euclidean_distance(x, y);
        if (r == 0.0) throw singular_evaluation("riesz kernel evaluated at x == y");
        return (x[j] - y[j]) / std::pow(r, n_ + 1);
      }
      case Family::fractional: {
        const double r = euclidean_distance(x, y);
        if (r == 0.0) throw singular_evaluation("fractional kernel evaluated at x == y");
        return std::pow(r, alpha_ - n_);
      }
      case Family::constant:
        return 1.0;
      case Family::zero:
        return 0.0;
    }
    return 0.0;
  }

  /// Sharp truncation: evaluate when delta <= |x-y| < R, zero otherwise.
  double truncated(int j, std::span<const double> x, std::span<const double> y,
                   const TruncPair& pair) const {
    const double r = euclidean_distance(x, y);
    if (!pair.active(r)) return 0.0;
    return evaluate(j, x, y);
  }

 private:
  Kernel(Family f, int n, double alpha) : family_(f), n_(n), alpha_(alpha) {
    if (n < 1 || n > max_dimension) throw invalid_input("kernel: bad dimension");
  }

  Family family_;
  int n_;
  double alpha_ = 0.0;
  int components_ = 1;
  double holder_ = 1.0;
  double c_cz_ = 1.0;
  int kappa1_ = 8;  // built-ins are smooth; declared orders are nominal
  int kappa2_ = 8;
  bool l2_bounded_ = false;
  bool transposed_ = false;
};

// ---------------------------------------------------------------------------
// Numerical validation of the size and Hoelder smoothness bounds:
//   |K(x,y)| <= C |x-y|^{alpha-n}
//   |K(x,y)-K(x',y)| <= C (|x-x'|/|x-y|)^d |x-y|^{alpha-n},  |x-x'| <= |x-y|/2
// together with the adjoint versions in which x and y are interchanged.
// Ratios are measured over seeded random samples and compared against the
// declared constant.

struct CzBoundsReport {
  double size_ratio = 0.0;
  double smooth_ratio = 0.0;
  double adjoint_smooth_ratio = 0.0;
  double gradient_ratio = 0.0;  // first finite difference vs |x-y|^{alpha-1-n}: diagnostic only
  std::size_t samples = 0;
  bool pass = false;
};

namespace detail {

inline void random_unit_vector(std::mt19937_64& rng, std::span<double> u) {
  if (u.size() == 1) {
    u[0] = (rng() & 1) ? 1.0 : -1.0;
    return;
  }
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& c : u) {
      // Box-Muller from two uniforms
      const double a = unit_double(rng), b = unit_double(rng);
      c = std::sqrt(-2.0 * std::log(std::max(a, 1e-300))) * std::cos(6.283185307179586 * b);
      norm += c * c;
    }
  } while (!(norm > 0.0));
  norm = std::sqrt(norm);
  for (double& c : u) c /= norm;
}

}  // namespace detail

inline CzBoundsReport validate_cz_bounds(const Kernel& kernel, std::size_t sample_count,
                                         std::uint64_t seed = 20240901) {
  if (sample_count < 1) throw invalid_input("validate_cz_bounds: sample_count must be >= 1");
  const int n = kernel.dim();
  const double alpha = kernel.alpha();
  const double d = kernel.holder_exponent();
  auto rng = seeded_rng(seed, "czbounds");
  std::vector<double> x(n), y(n), xp(n), yp(n), u(n), v(n);
  CzBoundsReport rep;
  rep.samples = sample_count;
  for (std::size_t s = 0; s < sample_count; ++s) {
    for (int a = 0; a < n; ++a) x[a] = uniform_double(rng, -1.0, 1.0);
    detail::random_unit_vector(rng, u);
    const double r = std::exp(uniform_double(rng, std::log(1e-3), std::log(10.0)));
    for (int a = 0; a < n; ++a) y[a] = x[a] + r * u[a];
    detail::random_unit_vector(rng, v);
    const double h = r * 0.5 * std::exp(uniform_double(rng, std::log(1e-4), 0.0));
    for (int a = 0; a < n; ++a) {
      xp[a] = x[a] + h * v[a];
      yp[a] = y[a] + h * v[a];
    }
    const double scale = std::pow(r, alpha - n);
    for (int j = 0; j < kernel.components(); ++j) {
      const double k0 = kernel.evaluate(j, x, y);
      rep.size_ratio = std::max(rep.size_ratio, std::abs(k0) / scale);
      const double holder = std::pow(h / r, d) * scale;
      rep.smooth_ratio =
          std::max(rep.smooth_ratio, std::abs(k0 - kernel.evaluate(j, xp, y)) / holder);
      rep.adjoint_smooth_ratio =
          std::max(rep.adjoint_smooth_ratio, std::abs(k0 - kernel.evaluate(j, x, yp)) / holder);
      rep.gradient_ratio =
          std::max(rep.gradient_ratio, std::abs(k0 - kernel.evaluate(j, xp, y)) / h /
                                           std::pow(r, alpha - 1 - n));
    }
  }
  const double c = kernel.cz_constant() * (1.0 + 1e-9);
  rep.pass = rep.size_ratio <= c && rep.smooth_ratio <= c && rep.adjoint_smooth_ratio <= c;
  return rep;
}

// ---------------------------------------------------------------------------
// Ellipticity: c_ell = min over sampled unit directions u of
//   max over components j of min over t in the ladder of |K_j(x, x+tu)| t^{n-alpha}.
// Built-ins are translation invariant, so x = 0.

struct EllipticityReport {
  double c_ell = 0.0;
  std::vector<double> worst_direction;
  std::size_t direction_samples = 0;
};

inline EllipticityReport ellipticity(const Kernel& kernel, std::span<const double> t_ladder,
                                     int direction_samples, std::uint64_t seed = 7) {
  if (direction_samples < 1) throw invalid_input("ellipticity: need at least one direction");
  if (t_ladder.empty()) throw invalid_input("ellipticity: need at least one scale");
  for (double t : t_ladder)
    if (!(t > 0.0)) throw invalid_input("ellipticity: scales must be positive");
  const int n = kernel.dim();
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (n == 2) {
    dirs.reserve(direction_samples);
    for (int k = 0; k < direction_samples; ++k) {
      const double th = 6.283185307179586 * k / direction_samples;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    auto rng = seeded_rng(seed, "ellipticity");
    std::vector<double> u(n);
    for (int k = 0; k < direction_samples; ++k) {
      detail::random_unit_vector(rng, u);
      dirs.push_back(u);
    }
  }
  EllipticityReport rep;
  rep.direction_samples = dirs.size();
  std::vector<double> x0(n, 0.0), y(n);
  bool first = true;
  for (const auto& u : dirs) {
    double best_component = 0.0;
    for (int j = 0; j < kernel.components(); ++j) {
      double worst_t = std::numeric_limits<double>::infinity();
      for (double t : t_ladder) {
        for (int a = 0; a < n; ++a) y[a] = x0[a] + t * u[a];
        worst_t = std::min(worst_t,
                           std::abs(kernel.evaluate(j, x0, y)) * std::pow(t, n - kernel.alpha()));
      }
      best_component = std::max(best_component, worst_t);
    }
    if (first || best_component < rep.c_ell) {
      rep.c_ell = best_component;
      rep.worst_direction = u;
      first = false;
    }
  }
  return rep;
}

}  // namespace czlab
