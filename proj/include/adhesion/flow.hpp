#pragma once

#include <vector>

#include "adhesion/model.hpp"

namespace adhesion {

struct Block {
  std::size_t first = 0;  // particle index range [first, last]
  std::size_t last = 0;
  double x = 0.0;     // block position at time t (mass barycenter)
  double mass = 0.0;
  double w = 0.0;     // block velocity (momentum / mass)
  double alpha = 0.0; // a[first]
  double beta = 0.0;  // a[last]
  std::size_t size() const { return last - first + 1; }
};

/// The state of the flow at one time: contiguous blocks with strictly
/// increasing positions.
struct ClusterState {
  double t = 0.0;
  std::vector<Block> blocks;
  std::vector<std::size_t> block_of;  // particle index -> block index

  const Block& block_of_particle(std::size_t i) const {
    return blocks[block_of[i]];
  }
  /// Index of the block whose position is nearest to x.
  std::size_t nearest_block(double x) const;
  /// Block with |position - x| within tolerance, or npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find_block_at(double x, double tol) const;
};

struct SafeWindow {
  Interval query;
  double horizon = 0.0;
  Interval enlarged;  // [A_T, B_T] in initial coordinates
};

/// Coarsest contiguous partition of free-flight positions a + t v whose
/// block barycenters are strictly increasing. Weighted pool-adjacent-
/// violators, O(n); blocks whose barycenters tie within
/// 1e-12 * (window width) are merged (grazing contact).
ClusterState cluster_at(const ParticleSystem& sys, double t);

/// phi_{s,t}: time-(s+t) position of the matter located at y at time s.
/// Between block positions the map interpolates linearly in the initial
/// coordinate (free flight of fictitious massless matter).
double flow_map(const ParticleSystem& sys, double s, double t, double y);
double flow_map(const ParticleSystem& sys, const ClusterState& at_s,
                const ClusterState& at_st, double y);

/// Initial positions [alpha, beta] of the preimage of x at time t;
/// alpha == beta when x is not a block position.
std::pair<double, double> cluster_bounds(const ParticleSystem& sys, double t,
                                         double x);
std::pair<double, double> cluster_bounds(const ParticleSystem& sys,
                                         const ClusterState& state, double x);

struct VelocityValue {
  double u = 0.0;
  double u_minus = 0.0;
  double u_plus = 0.0;
};

VelocityValue velocity_field(const ParticleSystem& sys, double t, double x);
VelocityValue velocity_field(const ParticleSystem& sys,
                             const ClusterState& state, double x);

/// Enlarged initial interval outside which matter cannot influence flow
/// queries inside `query` up to horizon T.
SafeWindow safe_window(const ParticleSystem& sys, Interval query, double T);

/// Position of initial coordinate `a0` at the time of `state`; piecewise
/// linear and non-decreasing in a0. Exposed for the turbulence processes.
double position_of_initial(const ParticleSystem& sys, const ClusterState& state,
                           double a0);

/// Absolute tie/lookup tolerance used for block-position matching.
double position_tolerance(const ParticleSystem& sys);

}  // namespace adhesion
