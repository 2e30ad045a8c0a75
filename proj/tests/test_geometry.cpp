#include <catch2/catch_amalgamated.hpp>

#include "czlab/geometry.hpp"
#include "oracles.hpp"

using namespace czlab;

TEST_CASE("cube basics") {
  Cube q({0.5}, 1.0);
  CHECK(q.dim() == 1);
  CHECK(q.volume() == 1.0);
  CHECK(q.lo(0) == 0.0);
  CHECK(q.hi(0) == 1.0);
  CHECK_THROWS_AS(Cube({0.0}, 0.0), invalid_input);
  CHECK_THROWS_AS(Cube({0.0}, -1.0), invalid_input);

  Cube sq({0.0, 0.0}, 2.0);
  CHECK(sq.volume() == 4.0);
}

TEST_CASE("cube membership is half-open per axis") {
  Cube q({0.5}, 1.0);
  const double inside = 0.25, at_hi = 1.0, at_lo = 0.0;
  CHECK(q.contains_point(std::span<const double>(&inside, 1)));
  CHECK(q.contains_point(std::span<const double>(&at_hi, 1)));
  CHECK_FALSE(q.contains_point(std::span<const double>(&at_lo, 1)));
}

TEST_CASE("dilate") {
  Cube q({0.5}, 1.0);
  Cube d = dilate(q, 2.0);
  CHECK(d.lo(0) == Catch::Approx(-0.5).margin(1e-15));
  CHECK(d.hi(0) == Catch::Approx(1.5).margin(1e-15));
  CHECK(d.center[0] == q.center[0]);

  Cube same = dilate(q, 1.0);
  CHECK(same.side == q.side);

  // beta-dilate then (1/beta)-dilate returns the original cube
  const double beta = 0.37;
  Cube round = dilate(dilate(q, beta), 1.0 / beta);
  CHECK(round.side == Catch::Approx(q.side).epsilon(1e-12));
  CHECK(round.center[0] == q.center[0]);

  CHECK_THROWS_AS(dilate(q, 0.0), invalid_input);
  CHECK_THROWS_AS(dilate(q, -2.0), invalid_input);

  CHECK(dilate(q, 2.0).contains_cube(q));
}

TEST_CASE("enumerate_cubes: interval at depth one, no shifts") {
  CubeFamily family(Cube({0.5}, 1.0), 1, false);
  const auto cubes = enumerate_cubes(family);
  REQUIRE(cubes.size() == 3);
  CHECK(cubes[0].side == 1.0);
  CHECK(cubes[1].lo(0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(cubes[1].hi(0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(cubes[2].lo(0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(cubes[2].hi(0) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("enumerate_cubes: level zero square is just the root") {
  CubeFamily family(Cube({0.5, 0.5}, 1.0), 0, true);
  const auto cubes = enumerate_cubes(family);
  REQUIRE(cubes.size() == 1);
  CHECK(cubes[0].side == 1.0);
}

TEST_CASE("enumerate_cubes: shifted counts match an independent enumeration") {
  for (int n : {1, 2}) {
    for (int level : {1, 2, 3}) {
      const Cube root(std::vector<double>(n, 0.5), 1.0);
      CubeFamily family(root, level, true);
      const auto cubes = enumerate_cubes(family);
      CHECK(cubes.size() == oracles::independent_family_count(root, level, true));
      for (const Cube& q : cubes) CHECK(root.contains_cube(q));
    }
  }
}

TEST_CASE("cell_partition basics") {
  const auto cells = cell_partition(Cube({0.5}, 1.0), 1);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].hi(0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(cells[1].lo(0) == Catch::Approx(0.5).margin(1e-15));

  CHECK(cell_partition(Cube({0.5, 0.5}, 1.0), 1).size() == 4);
}

TEST_CASE("cell_partition: volumes add up to the cube volume") {
  for (int level : {1, 4, 8, 12}) {
    const Cube q({0.3}, 0.7);
    double sum = 0.0;
    for (const Cube& c : cell_partition(q, level)) sum += c.volume();
    CHECK(sum == Catch::Approx(q.volume()).epsilon(1e-12));
  }
  const Cube sq({0.0, 0.0}, 2.0);
  double sum = 0.0;
  for (const Cube& c : cell_partition(sq, 5)) sum += c.volume();
  CHECK(sum == Catch::Approx(sq.volume()).epsilon(1e-12));
}

TEST_CASE("nesting: each dyadic child lies in exactly one parent") {
  const Cube root({0.0, 0.0}, 2.0);
  for (int level : {0, 1, 2}) {
    const auto parents = cell_partition(root, level);
    const auto children = cell_partition(root, level + 1);
    for (const Cube& c : children) {
      int owners = 0;
      for (const Cube& p : parents)
        if (p.contains_cube(c)) ++owners;
      CHECK(owners == 1);
    }
  }
}

TEST_CASE("grid: centers, locate, ranges") {
  const Grid g(Cube({0.5}, 1.0), 3);
  CHECK(g.cell_count() == 8);
  CHECK(g.cell_width() == Catch::Approx(0.125).margin(0.0));
  CHECK(g.center(0)[0] == Catch::Approx(0.0625).margin(1e-15));

  // locate honors the (lo, hi] rule at interior boundaries
  const double boundary = 0.25;  // between cells 1 and 2
  auto idx = g.locate(std::span<const double>(&boundary, 1));
  REQUIRE(idx.has_value());
  CHECK(*idx == 1);

  const double outside = 1.5;
  CHECK_FALSE(g.locate(std::span<const double>(&outside, 1)).has_value());

  const auto r = g.axis_range(0, 0.25, 0.75);
  CHECK(r.begin == 2);
  CHECK(r.end == 6);

  const auto cells = g.cells_in(Cube({0.5}, 0.5));
  REQUIRE(cells.size() == 4);
  CHECK(cells.front() == 2);
  CHECK(cells.back() == 5);
}

TEST_CASE("grid: two-dimensional boxes") {
  const Grid g(Cube({0.0, 0.0}, 2.0), 2);
  CHECK(g.cell_count() == 16);
  const auto cells = g.cells_in(Cube({-0.5, -0.5}, 1.0));
  CHECK(cells.size() == 4);
  for (std::size_t c : cells) {
    CHECK(g.center(c)[0] < 0.0 + 1e-12);
    CHECK(g.center(c)[1] < 0.0 + 1e-12);
  }
}

TEST_CASE("grid: partition ordering matches cell_partition") {
  const Cube root({0.25, -1.0}, 1.5);
  const Grid g(root, 2);
  const auto cells = cell_partition(root, 2);
  REQUIRE(cells.size() == g.cell_count());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].center[0] == Catch::Approx(g.center(i)[0]).margin(1e-15));
    CHECK(cells[i].center[1] == Catch::Approx(g.center(i)[1]).margin(1e-15));
  }
}
