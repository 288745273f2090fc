#pragma once

#include <string>
#include <vector>

#include "adhesion/flow.hpp"
#include "adhesion/oracle.hpp"

namespace adhesion {

enum class IntervalKind { BornCluster, Aggregation, Point };

const char* to_string(IntervalKind k);

struct TurbulentInterval {
  std::size_t id = 0;
  std::size_t first = 0, last = 0;  // particle index range
  double A = 0.0, B = 0.0;          // initial positions a[first], a[last]
  double tau = kInfTime;
  double birth_x = 0.0;             // A + tau * u0(A)
  IntervalKind kind = IntervalKind::Point;
  // Enclosing cluster at the birth time (particle index range); equals
  // [first, last] for born clusters and for tau = +inf.
  std::size_t cluster_first = 0, cluster_last = 0;
};

struct TurbulenceReport {
  double horizon = 0.0;
  std::vector<ShockRecord> shocks;          // per particle
  std::vector<TurbulentInterval> intervals;
  std::vector<std::size_t> interval_of;     // particle -> interval index

  double tau(std::size_t particle) const { return shocks[particle].tau; }
};

std::vector<double> first_shock_times(const ParticleSystem& sys,
                                      double horizon);

/// Groups particles into maximal contiguous runs sharing first shock time
/// and first shock position, then classifies each run against the cluster
/// at its birth time.
TurbulenceReport turbulent_intervals(const ParticleSystem& sys, double horizon);

enum class EntrySide { Left, Right };

const char* to_string(EntrySide s);

struct ProcessBundle {
  double x0 = 0.0;
  std::size_t particle = 0;
  double gamma = kInfTime;
  EntrySide side = EntrySide::Left;
  // Particle indices anchoring the four processes (Z0 values are a[...]).
  std::size_t kA = 0, kB = 0, k3 = 0, k4 = 0;
  std::vector<double> grid;
  std::vector<double> X, Z1, Z2, Z3, Z4, Y;
};

/// Entry-side rule evaluated on the initial process values.
EntrySide classify_entry_side(double z1_0, double z2_0, double z3_0,
                              double z4_0, double x0, double tol);

/// x0 must coincide with a particle position. `states` must hold
/// cluster_at(sys, t) for each grid time, in order.
ProcessBundle build_bundle(const ParticleSystem& sys,
                           const TurbulenceReport& report, double x0,
                           const std::vector<double>& grid,
                           const std::vector<ClusterState>& states);

ProcessBundle build_bundle(const ParticleSystem& sys,
                           const TurbulenceReport& report, double x0,
                           const std::vector<double>& grid);

/// Left/right delta-shock legs by backtracking from the time-r position:
/// for t < r, f = phi_{0,r}(a) - (r-t) u^-, g likewise with u^+.
std::pair<double, double> f_g_values(const ParticleSystem& sys, double a,
                                     double t, double r);

struct Polyline {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (t, x)
};

std::vector<Polyline> delta_shock_geometry(const ParticleSystem& sys,
                                           const TurbulenceReport& report,
                                           std::size_t interval_id,
                                           const std::vector<double>& grid);

}  // namespace adhesion
