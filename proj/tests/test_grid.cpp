#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "genlik/errors.hpp"
#include "genlik/grid.hpp"
#include "genlik/rng.hpp"

using namespace genlik;

TEST_CASE("finite joint validates and exposes marginals") {
  const FiniteJoint joint(2, 2, {0.1, 0.2, 0.3, 0.4});
  CHECK(joint.n() == 2);
  CHECK(joint(0, 1) == doctest::Approx(0.2).epsilon(1e-15));
  const auto py = joint.marginal_y();
  CHECK(py[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(py[1] == doctest::Approx(0.6).epsilon(1e-15));
  const auto px = joint.marginal_x();
  CHECK(px[0] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("construction rejects bad mass and repairs small drift") {
  CHECK_THROWS_AS(FiniteJoint(2, 1, {0.5, 0.6}), InvalidDistribution);
  CHECK_THROWS_AS(FiniteJoint(2, 1, {-0.1, 1.1}), InvalidDistribution);
  CHECK_THROWS_AS(FiniteJoint(2, 2, {0.5, 0.5}), DimensionMismatch);

  // drift within 1e-9 renormalizes
  const FiniteJoint drifted(2, 1, {0.5 + 4e-10, 0.5});
  double sum = 0.0;
  for (double c : drifted.cells()) sum += c;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(ObservedMarginal({0.5, 0.6}), InvalidDistribution);
  const ObservedMarginal u = ObservedMarginal::uniform(4);
  CHECK(u(3) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("grid csv round trip is lossless within 1e-15") {
  RngStream rng(42, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> cells(12);
    double total = 0.0;
    for (double& c : cells) total += (c = rng.uniform_positive());
    for (double& c : cells) c /= total;
    const FiniteJoint joint(3, 4, cells);
    std::stringstream ss;
    write_joint_csv(ss, joint);
    const FiniteJoint back = read_joint_csv(ss);
    REQUIRE(back.n() == 3);
    REQUIRE(back.m() == 4);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 4; ++y)
        CHECK(std::fabs(back(x, y) - joint(x, y)) <= 1e-15);
  }
}

TEST_CASE("grid csv rejects malformed input") {
  std::stringstream missing("x,y,p\n0,0,0.5\n");  // 1x1 grid short of mass
  CHECK_THROWS_AS(read_joint_csv(missing), InvalidDistribution);
  std::stringstream header("a,b,c\n");
  CHECK_THROWS_AS(read_joint_csv(header), Error);
  std::stringstream dup("x,y,p\n0,0,0.5\n0,0,0.5\n");
  CHECK_THROWS_AS(read_joint_csv(dup), Error);
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  bool differs = false;
  RngStream a2(7, 3);
  for (int i = 0; i < 100; ++i) differs |= (a2.next() != c.next());
  CHECK(differs);
  RngStream u(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform01();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}
