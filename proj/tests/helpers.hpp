#pragma once

#include <memory>
#include <vector>

#include "adhesion/model.hpp"

namespace adhesion::testing {

/// Hand-built system; window defaults to the hull of the positions.
inline ParticleSystem make_system(std::vector<double> a, std::vector<double> m,
                                  std::vector<double> v) {
  ParticleSystem sys;
  sys.a = std::move(a);
  sys.m = std::move(m);
  sys.v = std::move(v);
  sys.window = {sys.a.front(), sys.a.back()};
  return sys;
}

inline VelocityProfile step_profile(double left = 1.0, double right = 0.0,
                                    double at = 0.0) {
  return VelocityProfile({at}, {AffineSegment{0.0, left},
                                AffineSegment{0.0, right}});
}

/// Uniform mass on [-A, A] with a single downward velocity step at 0.
inline ParticleSystem example1_system(std::size_t n, double A = 2.0) {
  Interval window{-A, A};
  return discretize(MassDistribution::lebesgue(window), step_profile(), n,
                    window);
}

/// Density 2 left of 0, density 1 right of 0, same velocity step.
inline ParticleSystem example2_system(std::size_t n, double A = 2.0) {
  Interval window{-A, A};
  MassDistribution dist({DensityPiece{{-A, 0.0}, 2.0},
                         DensityPiece{{0.0, A}, 1.0}},
                        {}, window);
  return discretize(dist, step_profile(), n, window);
}

inline ParticleSystem random_system(SplitMix64& rng, std::size_t n) {
  std::vector<double> a(n), m(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double jitter = 0.1 + 0.8 * rng.next_unit();
    a[i] = -1.0 + 2.0 * (static_cast<double>(i) + jitter) /
                      static_cast<double>(n);
    m[i] = 0.2 + rng.next_unit();
    v[i] = 2.0 * rng.next_unit() - 1.0;
  }
  return make_system(std::move(a), std::move(m), std::move(v));
}

}  // namespace adhesion::testing
