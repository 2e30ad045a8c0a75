#include <catch2/catch_amalgamated.hpp>

#include "czlab/constants.hpp"
#include "czlab/harness.hpp"
#include "oracles.hpp"

using namespace czlab;

namespace {

const Cube unit({0.5}, 1.0);
const Cube sym({0.0}, 2.0);

}  // namespace

TEST_CASE("a2 of the Lebesgue pair is one") {
  const GridMeasure leb = lebesgue_measure(unit, 6);
  const ConstantReport rep = a2_alpha(leb, leb, 0.0, CubeFamily(unit, 6));
  CHECK(rep.value == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a2 scales exactly in the first measure") {
  auto rng = seeded_rng(31, "a2-scale");
  const Grid g(unit, 5);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count()));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count()));
  const CubeFamily family(unit, 5);
  const double base = a2_alpha(sigma, omega, 0.0, family).value;
  CHECK(a2_alpha(sigma.scaled(4.0), omega, 0.0, family).value == 4.0 * base);
  CHECK(a2_alpha(sigma.scaled(0.25), omega, 0.0, family).value == 0.25 * base);
}

TEST_CASE("a2 of a power pair is stable against a finer exhaustive scan") {
  const auto [sigma10, omega10] = power_weight_pair(0.5, -0.5, sym, 10);
  const double coarse = a2_alpha(sigma10, omega10, 0.0, CubeFamily(sym, 10)).value;
  const auto [sigma12, omega12] = power_weight_pair(0.5, -0.5, sym, 12);
  const double fine = a2_alpha(sigma12, omega12, 0.0, CubeFamily(sym, 12)).value;
  CHECK(coarse == Catch::Approx(fine).epsilon(0.10));
}

TEST_CASE("a2 witness reproduces the reported value") {
  auto rng = seeded_rng(32, "a2-wit");
  const Grid g(unit, 5);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count()));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count()));
  const ConstantReport rep = a2_alpha(sigma, omega, 0.5, CubeFamily(unit, 5));
  REQUIRE(rep.witness.cube.has_value());
  CHECK(a2_ratio(sigma, omega, 0.5, *rep.witness.cube) ==
        Catch::Approx(rep.value).epsilon(1e-12));
}

TEST_CASE("poisson tail of a point mass") {
  // single-cell grid: all mass at the cube center
  const GridMeasure point(Grid(sym, 0), {1.0});
  CHECK(poisson(Cube({0.0}, 1.0), point, 0.0) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(poisson(sym, point, 0.0) == Catch::Approx(0.5).epsilon(1e-15));  // l = 2
  CHECK(poisson(Cube({0.0}, 1.0), point, 0.5) == Catch::Approx(1.0).epsilon(1e-15));

  const GridMeasure zero = from_density([](auto) { return 0.0; }, sym, 3);
  CHECK(poisson(Cube({0.0}, 1.0), zero, 0.0) == 0.0);
}

TEST_CASE("poisson tail of Lebesgue matches fine quadrature") {
  const GridMeasure leb = lebesgue_measure(sym, 10);
  const Cube q({0.0}, 1.0);
  const double coarse = poisson(q, leb, 0.0);
  const double fine =
      oracles::fine_poisson(q, [](std::span<const double>) { return 1.0; }, sym, 14, 0.0);
  CHECK(coarse == Catch::Approx(fine).epsilon(0.01));
  CHECK(fine == Catch::Approx(1.0).epsilon(0.01));  // exact integral over [-1,1]
}

TEST_CASE("one-tailed constant dominates the interior version") {
  auto rng = seeded_rng(33, "ot-dom");
  for (double alpha : {0.0, 0.5}) {
    const Grid g(unit, 5);
    const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count()));
    const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count()));
    const CubeFamily family(unit, 5);
    const double one_tailed = one_tailed_a2(sigma, omega, alpha, family).value;
    const double interior = a2_alpha(sigma, omega, alpha, family).value;
    // inside Q the Poisson integrand is at least 4^{alpha-n} l^{alpha-n}
    CHECK(one_tailed >= std::pow(4.0, alpha - 1.0) * interior * (1.0 - 1e-9));
  }
}

TEST_CASE("one-tailed constant of the zero measure vanishes") {
  const GridMeasure zero = from_density([](auto) { return 0.0; }, unit, 4);
  const GridMeasure leb = lebesgue_measure(unit, 4);
  CHECK(one_tailed_a2(zero, leb, 0.0, CubeFamily(unit, 4)).value == 0.0);
}

TEST_CASE("one-tailed constant is stable under refinement for Lebesgue") {
  const double at8 =
      one_tailed_a2(lebesgue_measure(unit, 8), lebesgue_measure(unit, 8), 0.0, CubeFamily(unit, 8))
          .value;
  const double at10 = one_tailed_a2(lebesgue_measure(unit, 10), lebesgue_measure(unit, 10), 0.0,
                                    CubeFamily(unit, 10))
                          .value;
  CHECK(at8 == Catch::Approx(at10).epsilon(0.10));
}

TEST_CASE("duality bookkeeping for the one-tailed constants") {
  auto rng = seeded_rng(34, "ot-dual");
  const Grid g(unit, 4);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count()));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count()));
  const CubeFamily family(unit, 4);
  CHECK(one_tailed_a2_dual(sigma, omega, 0.5, family).value ==
        one_tailed_a2(omega, sigma, 0.5, family).value);
}

TEST_CASE("monomials") {
  const Cube q({1.0}, 2.0);
  const std::vector<int> zero{0}, one{1};
  const std::vector<double> at2{2.0}, atc{1.0};
  CHECK(monomial(q, zero, at2) == 1.0);
  CHECK(monomial(q, one, at2) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(monomial(q, one, atc) == 0.0);

  // |m_Q^beta| <= 2^{-|beta|} on Q
  auto rng = seeded_rng(35, "monomial");
  const Cube sq({0.25, -0.5}, 1.5);
  for (int t = 0; t < 500; ++t) {
    const std::vector<double> p{uniform_double(rng, sq.lo(0), sq.hi(0)),
                                uniform_double(rng, sq.lo(1), sq.hi(1))};
    const std::vector<int> beta{static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)};
    CHECK(std::abs(monomial(sq, beta, p)) <=
          std::pow(2.0, -(beta[0] + beta[1])) * (1.0 + 1e-12));
  }
}

TEST_CASE("multiindex enumeration") {
  const auto m1 = multiindices_below(1, 3);
  REQUIRE(m1.size() == 3);
  CHECK(m1[0] == std::vector<int>{0});
  CHECK(m1[2] == std::vector<int>{2});

  const auto m2 = multiindices_below(2, 3);
  REQUIRE(m2.size() == 6);  // degrees 0,1,2: 1 + 2 + 3
  CHECK(m2[0] == std::vector<int>{0, 0});
  CHECK(m2[1] == std::vector<int>{0, 1});
  CHECK(m2[2] == std::vector<int>{1, 0});
  CHECK_THROWS_AS(multiindices_below(1, 0), invalid_input);
}

TEST_CASE("kappa testing with kappa = 1 is indicator testing") {
  auto rng = seeded_rng(36, "kappa1");
  const Grid g(unit, 3);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const Cube q({0.25}, 0.5);
  const TruncationLadder ladder = TruncationLadder::maximal(g);
  const Kernel h = Kernel::hilbert();
  const CubeTestingValue v = kappa_testing_cube(h, sigma, omega, 1, q, ladder);

  // independent indicator-testing sum over the cube's cells
  const auto cells = g.cells_in(q);
  double qs = 0.0;
  for (std::size_t c : cells) qs += sigma.mass(c);
  double sum = 0.0;
  for (std::size_t x : cells) {
    double t = 0.0;
    for (std::size_t y : cells) {
      const double r = euclidean_distance(g.center(x), g.center(y));
      if (r >= ladder.widest().delta && r < ladder.widest().R)
        t += h.evaluate(0, g.center(x), g.center(y)) * sigma.mass(y);
    }
    sum += omega.mass(x) * t * t;
  }
  CHECK(v.value_sq == Catch::Approx(sum / qs).epsilon(1e-12));
  CHECK(v.beta == std::vector<int>{0});
}

TEST_CASE("kappa testing of a three-cell cube against a hand-expanded sum") {
  // [0,1] at L = 2; the cube (0, 0.75] holds exactly the first three cells
  const Grid g(unit, 2);
  const GridMeasure sigma(g, {0.7, 0.2, 0.4, 0.9});
  const GridMeasure omega(g, {0.3, 0.8, 0.5, 0.1});
  const Cube q({0.375}, 0.75);
  const TruncationLadder ladder = TruncationLadder::single(g.cell_width(), 100.0);
  const CubeTestingValue v = kappa_testing_cube(Kernel::constant(1), sigma, omega, 1, q, ladder);
  // T(1_Q sigma)(x_i) = sum of the other two sigma masses
  const double t0 = 0.2 + 0.4, t1 = 0.7 + 0.4, t2 = 0.7 + 0.2;
  const double expected = (0.3 * t0 * t0 + 0.8 * t1 * t1 + 0.5 * t2 * t2) / (0.7 + 0.2 + 0.4);
  CHECK(v.value_sq == Catch::Approx(expected).epsilon(1e-15));
}

TEST_CASE("kappa testing: zero omega gives zero, zero sigma is degenerate") {
  const Grid g(unit, 3);
  const GridMeasure sigma = lebesgue_measure(unit, 3);
  const GridMeasure zero = from_density([](auto) { return 0.0; }, unit, 3);
  const CubeFamily family(unit, 3);
  const TruncationLadder ladder = TruncationLadder::maximal(g);
  CHECK(kappa_cube_testing(Kernel::hilbert(), sigma, zero, 2, family, ladder).value == 0.0);
  CHECK_THROWS_AS(kappa_cube_testing(Kernel::hilbert(), zero, sigma, 2, family, ladder),
                  degenerate_error);
}

TEST_CASE("kappa testing is monotone in kappa and scales like sqrt(c)") {
  auto rng = seeded_rng(37, "kappa-mono");
  const Grid g(unit, 3);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const CubeFamily family(unit, 3);
  const TruncationLadder ladder = TruncationLadder::nested(g);
  const Kernel h = Kernel::hilbert();
  const double t1 = kappa_cube_testing(h, sigma, omega, 1, family, ladder).value;
  const double t2 = kappa_cube_testing(h, sigma, omega, 2, family, ladder).value;
  const double t3 = kappa_cube_testing(h, sigma, omega, 3, family, ladder).value;
  CHECK(t1 <= t2 * (1.0 + 1e-12));
  CHECK(t2 <= t3 * (1.0 + 1e-12));

  CHECK(kappa_cube_testing(h, sigma.scaled(4.0), omega, 2, family, ladder).value ==
        Catch::Approx(2.0 * t2).epsilon(1e-12));
}

TEST_CASE("kappa testing witness reproduces the reported value") {
  auto rng = seeded_rng(38, "kappa-wit");
  const Grid g(unit, 3);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const ConstantReport rep =
      kappa_cube_testing(Kernel::hilbert(), sigma, omega, 2, CubeFamily(unit, 3),
                         TruncationLadder::nested(g));
  REQUIRE(rep.witness.cube.has_value());
  const CubeTestingValue v = kappa_testing_cube(Kernel::hilbert(), sigma, omega, 2,
                                                *rep.witness.cube, TruncationLadder::nested(g));
  CHECK(std::sqrt(v.value_sq) == Catch::Approx(rep.value).epsilon(1e-12));
}

TEST_CASE("cancellation: odd kernels annihilate constants at the center of symmetry") {
  const Grid g(sym, 4);
  const GridMeasure leb = lebesgue_measure(sym, 4);
  const Kernel h = Kernel::hilbert();
  const std::vector<double> x0{0.0};
  double inner = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double r = euclidean_distance(g.center(i), x0);
    if (r >= g.cell_width() && r < 0.5) inner += h.evaluate(0, x0, g.center(i)) * leb.mass(i);
  }
  CHECK(std::abs(inner) <= 1e-12);
}

TEST_CASE("cancellation search skips massless balls") {
  // sigma lives on the right half; a ball on the left is skipped, one on
  // the right carries the report
  const Grid g(sym, 4);
  const GridMeasure sigma = from_density(
      [](std::span<const double> p) { return p[0] >= 0.5 ? 1.0 : 0.0; }, sym, 4);
  const GridMeasure omega = lebesgue_measure(sym, 4);
  CancellationSearch search;
  search.centers = {{-0.75}, {0.75}};
  search.radii = {0.25};
  search.eps_ladder = {g.cell_width()};
  search.poly_trials = 0;
  const ConstantReport rep = cancellation_constant(Kernel::hilbert(), sigma, omega, 1, search);
  REQUIRE(!rep.witness.center.empty());
  CHECK(rep.witness.center[0] == 0.75);

  const GridMeasure zero = from_density([](auto) { return 0.0; }, sym, 4);
  CHECK_THROWS_AS(cancellation_constant(Kernel::hilbert(), zero, omega, 1, search),
                  degenerate_error);
}

TEST_CASE("cancellation matches a direct double-sum re-implementation") {
  const int level = 5;
  const Grid g(sym, level);
  const GridMeasure sigma = lebesgue_measure(sym, level);
  const GridMeasure omega = lebesgue_measure(sym, level);
  const Kernel h = Kernel::hilbert();
  auto rng = seeded_rng(39, "cancel-oracle");
  for (int t = 0; t < 5; ++t) {
    const double x0 = uniform_double(rng, -0.5, 0.5);
    const double radius = uniform_double(rng, 0.3, 0.9);
    const double eps = g.cell_width() * (1 + rng() % 3);
    CancellationSearch search;
    search.centers = {{x0}};
    search.radii = {radius};
    search.eps_ladder = {eps};
    search.poly_trials = 0;
    const ConstantReport rep = cancellation_constant(h, sigma, omega, 1, search);

    // independent straightforward re-summation (constant polynomial has
    // sup norm 1 on any nonempty ball)
    double outer = 0.0, ball_sigma = 0.0;
    for (std::size_t xi = 0; xi < g.cell_count(); ++xi) {
      if (!(std::abs(g.center(xi)[0] - x0) < radius)) continue;
      ball_sigma += sigma.mass(xi);
      double inner = 0.0;
      for (std::size_t yi = 0; yi < g.cell_count(); ++yi) {
        const double r = std::abs(g.center(xi)[0] - g.center(yi)[0]);
        if (r >= eps && r < radius)
          inner += (1.0 / (g.center(xi)[0] - g.center(yi)[0])) * sigma.mass(yi);
      }
      outer += omega.mass(xi) * inner * inner;
    }
    REQUIRE(ball_sigma > 0.0);
    CHECK(rep.value == Catch::Approx(outer / ball_sigma).epsilon(1e-12));
  }
}

TEST_CASE("cancellation dual swaps measures and transposes the kernel") {
  auto rng = seeded_rng(40, "cancel-dual");
  const Grid g(sym, 4);
  const GridMeasure sigma(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  const GridMeasure omega(g, oracles::random_masses(rng, g.cell_count(), 0.0));
  CancellationSearch search;
  search.centers = {{0.0}};
  search.radii = {0.75};
  search.eps_ladder = {g.cell_width()};
  search.poly_trials = 2;
  const Kernel h = Kernel::hilbert();
  CHECK(cancellation_constant_dual(h, sigma, omega, 2, search).value ==
        cancellation_constant(h.adjoint(), omega, sigma, 2, search).value);
}
