#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

/// czlab: a desk-scale numerical laboratory for two-weight norm
/// inequalities of singular integral operators on discretized
/// measure pairs.
namespace czlab {

inline constexpr std::string_view version_string = "1.0.0";

/// Bad user-facing input: configuration, file formats, parameter ranges.
class invalid_input : public std::runtime_error {
 public:
  explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that cannot proceed because the data carries no usable
/// mass (all-zero measures, empty search spaces, ...).
class degenerate_error : public std::runtime_error {
 public:
  explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

/// Kernel evaluated on its diagonal.
class singular_evaluation : public std::runtime_error {
 public:
  explicit singular_evaluation(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver ran out of iterations; carries the last estimate.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double last)
      : std::runtime_error(what), last_estimate(last) {}
  double last_estimate;
};

// ---------------------------------------------------------------------------
// Deterministic seeding. One master seed per experiment; per-task streams are
// derived by stable hashing of (task name, indices) so results do not depend
// on scheduling order.

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view task,
                                 std::uint64_t k0 = 0, std::uint64_t k1 = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a(task));
  h = splitmix64(h ^ (k0 + 0x165667b19e3779f9ull));
  h = splitmix64(h ^ (k1 + 0x27d4eb2f165667c5ull));
  return h;
}

inline std::mt19937_64 seeded_rng(std::uint64_t master, std::string_view task,
                                  std::uint64_t k0 = 0, std::uint64_t k1 = 0) {
  return std::mt19937_64(derive_seed(master, task, k0, k1));
}

/// Uniform double in [0,1) from the top 53 bits of the engine output.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo,hi).
inline double uniform_double(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_double(rng);
}

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules.

inline double sq(double x) { return x * x; }

/// x^k for integer k >= 0 by repeated multiplication (exact for dyadic x).
inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
  return std::sqrt(s);
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Full-precision decimal rendering (17 significant digits); round-trips
/// IEEE doubles exactly. '.' decimal separator independent of locale.
inline std::string format_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

}  // namespace czlab
