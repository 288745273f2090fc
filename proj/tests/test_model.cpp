#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "adhesion/model.hpp"
#include "helpers.hpp"

using namespace adhesion;
using adhesion::testing::step_profile;

TEST_CASE("uniform measure: cumulative, mass, quantile") {
  MassDistribution dist = MassDistribution::lebesgue({-1.0, 1.0});
  CHECK(dist.total_mass() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dist.cumulative(0.0) == doctest::Approx(1.0));
  CHECK(dist.mass(-0.5, 0.5) == doctest::Approx(1.0));
  CHECK(dist.quantile(0.5) == doctest::Approx(-0.5));
  CHECK(dist.is_lebesgue());
}

TEST_CASE("atoms enter cumulative and quantile") {
  MassDistribution dist({DensityPiece{{-1.0, 1.0}, 1.0}}, {Atom{0.0, 3.0}},
                        {-1.0, 1.0});
  CHECK(dist.total_mass() == doctest::Approx(5.0));
  CHECK(dist.cumulative(0.0) == doctest::Approx(4.0));
  CHECK(dist.cumulative(-1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  // Any target inside the atom's mass range lands on the atom.
  CHECK(dist.quantile(1.5) == 0.0);
  CHECK(dist.quantile(3.9) == 0.0);
  CHECK(dist.quantile(4.5) == doctest::Approx(0.5));
  CHECK_FALSE(dist.is_lebesgue());
}

TEST_CASE("vacuum inside the window is rejected") {
  CHECK_THROWS_AS(MassDistribution({DensityPiece{{-1.0, 0.0}, 1.0},
                                    DensityPiece{{0.5, 1.0}, 1.0}},
                                   {}, {-1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MassDistribution({DensityPiece{{-1.0, 0.0}, 1.0}}, {},
                                   {-1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MassDistribution({DensityPiece{{-1.0, 0.0}, 1.0},
                                    DensityPiece{{-0.5, 1.0}, 1.0}},
                                   {}, {-1.0, 1.0}),
                  std::invalid_argument);  // overlap
}

TEST_CASE("velocity profile evaluation is cadlag with left limits") {
  VelocityProfile prof = step_profile();  // 1 below 0, 0 from 0 on
  CHECK(prof.eval(-0.5) == 1.0);
  CHECK(prof.eval(0.0) == 0.0);
  CHECK(prof.eval(0.5) == 0.0);
  CHECK(prof.left_limit(0.0) == 1.0);
  CHECK(prof.right_limit(0.0) == 0.0);
  CHECK(prof.jump_height(0.0) == 1.0);
  CHECK(prof.non_increasing());
}

TEST_CASE("outermost segments must be flat") {
  CHECK_THROWS_AS(VelocityProfile({0.0}, {AffineSegment{1.0, 0.0},
                                          AffineSegment{0.0, 0.0}}),
                  std::invalid_argument);
}

TEST_CASE("antiderivative is anchored at zero and continuous") {
  VelocityProfile prof({-1.0, 1.0},
                       {AffineSegment{0.0, 1.0}, AffineSegment{-1.0, 0.0},
                        AffineSegment{0.0, -1.0}});
  CHECK(prof.antiderivative(0.0) == doctest::Approx(0.0));
  // U(1) = integral of -x over [0,1] = -0.5
  CHECK(prof.antiderivative(1.0) == doctest::Approx(-0.5));
  CHECK(prof.antiderivative(-1.0) == doctest::Approx(-0.5));
  // U(-2) = U(-1) - integral of 1 over [-2,-1]
  CHECK(prof.antiderivative(-2.0) == doctest::Approx(-1.5));
  for (double b : {-1.0, 1.0}) {
    double below = prof.antiderivative(b - 1e-9);
    double above = prof.antiderivative(b + 1e-9);
    CHECK(std::abs(above - below) < 1e-7);
  }
}

TEST_CASE("analytic decreasing profile") {
  VelocityProfile prof = VelocityProfile::neg_arctan(2.0);
  CHECK(prof.eval(1.0) == doctest::Approx(-2.0 * std::atan(1.0)));
  CHECK(prof.non_increasing());
  CHECK_FALSE(prof.is_piecewise());
  double x = 0.7;
  double expected = -2.0 * (x * std::atan(x) - 0.5 * std::log1p(x * x));
  CHECK(prof.antiderivative(x) == doctest::Approx(expected));
}

TEST_CASE("downward jumps are admissible, upward jumps are flagged") {
  MassDistribution dist = MassDistribution::lebesgue({-1.0, 1.0});
  CHECK(validate_njc(dist, step_profile()).ok);
  CHECK(validate_njc(dist, VelocityProfile::constant(0.0)).ok);
  ValidationReport bad = validate_njc(dist, step_profile(0.0, 1.0));
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].position == 0.0);
  CHECK(bad.violations[0].left == 0.0);
  CHECK(bad.violations[0].right == 1.0);
}

TEST_CASE("uniform discretization uses quantile midpoints") {
  ParticleSystem sys = discretize(MassDistribution::lebesgue({-1.0, 1.0}),
                                  VelocityProfile::constant(0.0), 4,
                                  {-1.0, 1.0});
  REQUIRE(sys.size() == 4);
  CHECK(sys.a[0] == doctest::Approx(-0.75));
  CHECK(sys.a[1] == doctest::Approx(-0.25));
  CHECK(sys.a[2] == doctest::Approx(0.25));
  CHECK(sys.a[3] == doctest::Approx(0.75));
  for (double m : sys.m) CHECK(m == doctest::Approx(0.5));
  CHECK(sys.lambda_provenance());
}

TEST_CASE("piecewise density discretization") {
  MassDistribution dist({DensityPiece{{-1.0, 0.0}, 2.0},
                         DensityPiece{{0.0, 1.0}, 1.0}},
                        {}, {-1.0, 1.0});
  ParticleSystem sys =
      discretize(dist, VelocityProfile::constant(0.0), 3, {-1.0, 1.0});
  REQUIRE(sys.size() == 3);
  CHECK(sys.a[0] == doctest::Approx(-0.75));
  CHECK(sys.a[1] == doctest::Approx(-0.25));
  CHECK(sys.a[2] == doctest::Approx(0.5));
  for (double m : sys.m) CHECK(m == doctest::Approx(1.0));
}

TEST_CASE("heavy atom becomes one exact particle") {
  MassDistribution dist({DensityPiece{{-1.0, 1.0}, 1.0}}, {Atom{0.0, 5.0}},
                        {-1.0, 1.0});
  ParticleSystem sys =
      discretize(dist, VelocityProfile::constant(0.3), 5, {-1.0, 1.0});
  REQUIRE(sys.size() == 5);
  bool found = false;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys.a[i] == 0.0) {
      found = true;
      CHECK(sys.m[i] == 5.0);
      CHECK(sys.v[i] == 0.3);
    }
  }
  CHECK(found);
  CHECK(sys.total_mass() == doctest::Approx(7.0).epsilon(1e-13));
}

TEST_CASE("a particle on a velocity jump splits into a limit pair") {
  ParticleSystem sys = discretize(MassDistribution::lebesgue({-1.0, 1.0}),
                                  step_profile(1.0, 0.0, 0.25), 4,
                                  {-1.0, 1.0});
  REQUIRE(sys.size() == 5);  // the particle at 0.25 split in two
  for (std::size_t i = 0; i < sys.size(); ++i) {
    CHECK((i == 0 || sys.a[i - 1] < sys.a[i]));
  }
  // The split pair straddles the breakpoint with half masses and the
  // one-sided limit velocities.
  std::size_t k = 0;
  while (k < sys.size() && sys.a[k] < 0.25 - 1e-6) ++k;
  REQUIRE(k + 1 < sys.size());
  CHECK(sys.a[k] < 0.25);
  CHECK(sys.a[k + 1] > 0.25);
  CHECK(sys.m[k] == doctest::Approx(0.25));
  CHECK(sys.m[k + 1] == doctest::Approx(0.25));
  CHECK(sys.v[k] == 1.0);
  CHECK(sys.v[k + 1] == 0.0);
  CHECK(sys.total_mass() == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("discretization rejects NJC violations and empty windows") {
  CHECK_THROWS_AS(discretize(MassDistribution::lebesgue({-1.0, 1.0}),
                             step_profile(0.0, 1.0), 4, {-1.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("discretization is deterministic and conserves mass") {
  for (std::size_t n : {7u, 100u, 1001u}) {
    ParticleSystem s1 = testing::example2_system(n);
    ParticleSystem s2 = testing::example2_system(n);
    CHECK(s1.a == s2.a);
    CHECK(s1.m == s2.m);
    CHECK(s1.v == s2.v);
    CHECK(s1.total_mass() == doctest::Approx(6.0).epsilon(1e-12));
  }
}

TEST_CASE("refining particle count keeps the mass profile close") {
  ParticleSystem coarse = testing::example1_system(50);
  ParticleSystem fine = testing::example1_system(400);
  double total = coarse.total_mass();
  auto cumulative_at = [](const ParticleSystem& sys, double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < sys.size() && sys.a[i] <= x; ++i) s += sys.m[i];
    return s;
  };
  for (double x = -2.0; x <= 2.0; x += 0.01) {
    CHECK(std::abs(cumulative_at(coarse, x) - cumulative_at(fine, x)) <=
          total / 50.0 + 1e-12);
  }
}

TEST_CASE("Stieltjes measure of a single step is one atom") {
  MassDistribution dist = stieltjes_distribution_from(step_profile());
  CHECK(dist.pieces().empty());
  REQUIRE(dist.atoms().size() == 1);
  CHECK(dist.atoms()[0].position == 0.0);
  CHECK(dist.atoms()[0].mass == 1.0);
}

TEST_CASE("Stieltjes measure of a clipped linear profile is a density") {
  VelocityProfile prof({-1.0, 1.0},
                       {AffineSegment{0.0, 1.0}, AffineSegment{-1.0, 0.0},
                        AffineSegment{0.0, -1.0}});
  MassDistribution dist = stieltjes_distribution_from(prof);
  REQUIRE(dist.pieces().size() == 1);
  CHECK(dist.pieces()[0].interval.lo == -1.0);
  CHECK(dist.pieces()[0].interval.hi == 1.0);
  CHECK(dist.pieces()[0].density == 1.0);
  CHECK(dist.atoms().empty());
}

TEST_CASE("Stieltjes measure mixes slopes and jumps") {
  // 1 below 0; 1 - 2x on [0,1); -1.5 from 1 on (jump 0.5 at 1).
  VelocityProfile prof({0.0, 1.0},
                       {AffineSegment{0.0, 1.0}, AffineSegment{-2.0, 1.0},
                        AffineSegment{0.0, -1.5}});
  MassDistribution dist = stieltjes_distribution_from(prof);
  REQUIRE(dist.pieces().size() == 1);
  CHECK(dist.pieces()[0].density == 2.0);
  CHECK(dist.pieces()[0].interval.lo == 0.0);
  CHECK(dist.pieces()[0].interval.hi == 1.0);
  REQUIRE(dist.atoms().size() == 1);
  CHECK(dist.atoms()[0].position == 1.0);
  CHECK(dist.atoms()[0].mass == doctest::Approx(0.5));
}

TEST_CASE("Stieltjes construction rejects increasing profiles") {
  CHECK_THROWS_AS(stieltjes_distribution_from(step_profile(0.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("njc validation is invariant under splitting a density piece") {
  VelocityProfile prof = step_profile();
  MassDistribution one({DensityPiece{{-1.0, 1.0}, 1.0}}, {}, {-1.0, 1.0});
  MassDistribution two({DensityPiece{{-1.0, 0.3}, 1.0},
                        DensityPiece{{0.3, 1.0}, 1.0}},
                       {}, {-1.0, 1.0});
  CHECK(validate_njc(one, prof).ok == validate_njc(two, prof).ok);
}
