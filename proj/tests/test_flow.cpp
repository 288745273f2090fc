#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "adhesion/flow.hpp"
#include "helpers.hpp"

using namespace adhesion;
using namespace adhesion::testing;

TEST_CASE("at time zero every particle is its own block") {
  ParticleSystem sys = make_system({0.0, 1.0, 3.0}, {1.0, 2.0, 1.0},
                                   {1.0, 0.0, -1.0});
  ClusterState state = cluster_at(sys, 0.0);
  REQUIRE(state.blocks.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(state.blocks[b].first == b);
    CHECK(state.blocks[b].last == b);
    CHECK(state.blocks[b].x == sys.a[b]);
    CHECK(state.blocks[b].w == sys.v[b]);
  }
}

TEST_CASE("two approaching particles merge and coast together") {
  ParticleSystem sys = make_system({0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0});
  ClusterState before = cluster_at(sys, 0.5);
  REQUIRE(before.blocks.size() == 2);
  ClusterState after = cluster_at(sys, 2.0);
  REQUIRE(after.blocks.size() == 1);
  // Collision at t = 1, x = 1; barycenter then moves at speed 0.5.
  CHECK(after.blocks[0].x == doctest::Approx(1.5));
  CHECK(after.blocks[0].w == doctest::Approx(0.5));
  CHECK(after.blocks[0].mass == doctest::Approx(2.0));
  CHECK(after.blocks[0].alpha == 0.0);
  CHECK(after.blocks[0].beta == 1.0);
}

TEST_CASE("uniform matter with a velocity step grows a central cluster") {
  // Matter in [-t, t/... ] ends in one heavy block at x = t/2 with w = 1/2;
  // preimage is [-t/2, t/2] scaled by the step sizes: here [-1,0] moving at 1
  // meets [0,1] at rest, so at time t the cluster holds initials in
  // [-t/2, t/2], sits at t/2... actually at x = t/2 with w = 1/2.
  std::size_t n = 4000;
  ParticleSystem sys = example1_system(n);
  double t = 1.0;
  ClusterState state = cluster_at(sys, t);
  std::size_t big = 0;
  for (std::size_t b = 1; b < state.blocks.size(); ++b) {
    if (state.blocks[b].mass > state.blocks[big].mass) big = b;
  }
  const Block& blk = state.blocks[big];
  CHECK(blk.x == doctest::Approx(0.5).epsilon(0).scale(1.0).epsilon(1e-3));
  CHECK(blk.w == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(blk.alpha == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(blk.beta == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(blk.mass == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("asymmetric densities shift the shock") {
  // Density 2 to the left (speed 1), density 1 to the right (rest).
  // Momentum balance puts the shock at x(t) with known closed form; at
  // t = 1 the cluster position is 2 - sqrt(2).
  ParticleSystem sys = example2_system(8000);
  ClusterState state = cluster_at(sys, 1.0);
  std::size_t big = 0;
  for (std::size_t b = 1; b < state.blocks.size(); ++b) {
    if (state.blocks[b].mass > state.blocks[big].mass) big = b;
  }
  CHECK(state.blocks[big].x == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("block positions are strictly increasing and mass is conserved") {
  SplitMix64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    ParticleSystem sys = random_system(rng, 40);
    for (double t : {0.0, 0.1, 0.7, 2.5, 10.0}) {
      ClusterState state = cluster_at(sys, t);
      double mass = 0.0, momentum = 0.0;
      for (std::size_t b = 0; b < state.blocks.size(); ++b) {
        if (b > 0) CHECK(state.blocks[b - 1].x < state.blocks[b].x);
        mass += state.blocks[b].mass;
        momentum += state.blocks[b].mass * state.blocks[b].w;
      }
      CHECK(mass == doctest::Approx(sys.total_mass()).epsilon(1e-12));
      CHECK(momentum ==
            doctest::Approx(sys.total_momentum()).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("barycenters beat free flight on the left, trail it on the right") {
  // Within a block, the barycenter of any left prefix lies at or right of
  // where free flight would put it (the defining variational inequality).
  SplitMix64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    ParticleSystem sys = random_system(rng, 30);
    ClusterState state = cluster_at(sys, 1.3);
    for (const Block& blk : state.blocks) {
      double ma = 0.0, mv = 0.0, mass = 0.0;
      for (std::size_t i = blk.first; i + 1 <= blk.last; ++i) {
        ma += sys.m[i] * sys.a[i];
        mv += sys.m[i] * sys.v[i];
        mass += sys.m[i];
        double prefix_bary = (ma + 1.3 * mv) / mass;
        CHECK(prefix_bary >= blk.x - 1e-9);
      }
    }
  }
}

TEST_CASE("flow map is the identity at zero duration") {
  ParticleSystem sys = example1_system(500);
  for (double y : {-1.5, -0.3, 0.0, 0.4, 1.9}) {
    CHECK(flow_map(sys, 0.7, 0.0, flow_map(sys, 0.0, 0.7, y)) ==
          doctest::Approx(flow_map(sys, 0.0, 0.7, y)).epsilon(1e-12));
  }
}

TEST_CASE("flow map satisfies the semigroup property") {
  SplitMix64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    ParticleSystem sys = random_system(rng, 25);
    for (double y : {-0.9, -0.2, 0.1, 0.6}) {
      double direct = flow_map(sys, 0.0, 1.5, y);
      double mid = flow_map(sys, 0.0, 0.6, y);
      double chained = flow_map(sys, 0.6, 0.9, mid);
      CHECK(chained == doctest::Approx(direct).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("flow map is monotone in the spatial argument") {
  SplitMix64 rng(123);
  ParticleSystem sys = random_system(rng, 40);
  double prev = -1e300;
  for (double y = sys.window.lo; y <= sys.window.hi; y += 0.005) {
    double x = flow_map(sys, 0.0, 0.8, y);
    CHECK(x >= prev - 1e-12);
    prev = x;
  }
}

TEST_CASE("cluster bounds recover the initial interval of a shock") {
  ParticleSystem sys = example1_system(4000);
  ClusterState state = cluster_at(sys, 1.0);
  std::size_t big = 0;
  for (std::size_t b = 1; b < state.blocks.size(); ++b) {
    if (state.blocks[b].mass > state.blocks[big].mass) big = b;
  }
  auto [alpha, beta] = cluster_bounds(sys, 1.0, state.blocks[big].x);
  CHECK(alpha == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(beta == doctest::Approx(0.5).epsilon(1e-3));
  // Off-cluster points have degenerate preimages.
  auto [a2, b2] = cluster_bounds(sys, 1.0, 1.6);
  CHECK(a2 == doctest::Approx(b2).scale(1.0).epsilon(1e-12));
}

TEST_CASE("velocity field brackets its one-sided limits") {
  ParticleSystem sys = example1_system(2000);
  ClusterState state = cluster_at(sys, 1.0);
  for (double x = -1.8; x <= 1.8; x += 0.01) {
    VelocityValue val = velocity_field(sys, state, x);
    CHECK(val.u_minus >= val.u - 1e-12);
    CHECK(val.u >= val.u_plus - 1e-12);
  }
  // Far from the shock the field is free-flight: 1 on the left, 0 right.
  CHECK(velocity_field(sys, state, -1.5).u == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(velocity_field(sys, state, 1.5).u == doctest::Approx(0.0).epsilon(1e-3));
  // At the shock the two limits differ.
  std::size_t big = 0;
  for (std::size_t b = 1; b < state.blocks.size(); ++b) {
    if (state.blocks[b].mass > state.blocks[big].mass) big = b;
  }
  VelocityValue shock = velocity_field(sys, state, state.blocks[big].x);
  CHECK(shock.u_minus - shock.u_plus > 0.5);
}

TEST_CASE("safe window truncation does not change interior answers") {
  ParticleSystem sys = example1_system(3000);
  Interval query{-0.4, 0.4};
  double T = 1.0;
  SafeWindow sw = safe_window(sys, query, T);
  CHECK(sw.enlarged.lo <= query.lo);
  CHECK(sw.enlarged.hi >= query.hi);

  // Rebuild the system keeping only particles inside the enlarged window.
  ParticleSystem cut;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys.a[i] >= sw.enlarged.lo && sys.a[i] <= sw.enlarged.hi) {
      cut.a.push_back(sys.a[i]);
      cut.m.push_back(sys.m[i]);
      cut.v.push_back(sys.v[i]);
    }
  }
  REQUIRE(cut.size() >= 2);
  REQUIRE(cut.size() < sys.size());
  cut.window = {cut.a.front(), cut.a.back()};

  for (double y = query.lo; y <= query.hi; y += 0.05) {
    for (double t : {0.3, 0.7, 1.0}) {
      CHECK(flow_map(cut, 0.0, t, y) ==
            doctest::Approx(flow_map(sys, 0.0, t, y)).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("safe window with zero horizon is the query itself") {
  ParticleSystem sys = example1_system(100);
  SafeWindow sw = safe_window(sys, {-0.5, 0.5}, 0.0);
  CHECK(sw.enlarged.lo == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(sw.enlarged.hi == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("matter outside every shock still free-flies") {
  ParticleSystem sys = example1_system(2000);
  ClusterState state = cluster_at(sys, 1.0);
  // Initial coordinate -1.5 (speed 1) has not met the shock by t = 1.
  CHECK(position_of_initial(sys, state, -1.5) ==
        doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(position_of_initial(sys, state, 1.5) ==
        doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("position_of_initial is monotone non-decreasing") {
  SplitMix64 rng(555);
  ParticleSystem sys = random_system(rng, 35);
  ClusterState state = cluster_at(sys, 2.0);
  double prev = -1e300;
  for (double a0 = sys.window.lo; a0 <= sys.window.hi; a0 += 0.002) {
    double x = position_of_initial(sys, state, a0);
    CHECK(x >= prev - 1e-12);
    prev = x;
  }
}
