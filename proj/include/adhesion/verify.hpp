#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adhesion/flow.hpp"
#include "adhesion/model.hpp"
#include "adhesion/turbulence.hpp"

namespace adhesion {

/// Convex test function; convexity is screened at construction via the
/// midpoint inequality on a 1e3-point grid.
class ConvexTestFunction {
 public:
  static ConvexTestFunction square();
  static ConvexTestFunction absolute();
  static ConvexTestFunction exp_scaled(double k);
  static ConvexTestFunction hinge(double c);  // max(0, x - c)
  static ConvexTestFunction custom(std::string name,
                                   std::function<double(double)> fn,
                                   Interval screen_range);

  double operator()(double x) const { return fn_(x); }
  const std::string& name() const { return name_; }

 private:
  ConvexTestFunction(std::string name, std::function<double(double)> fn,
                     Interval screen_range);
  std::string name_;
  std::function<double(double)> fn_;
};

struct CheckReport {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string diagnostics;
};

struct EmpiricalMeasure {
  std::vector<double> positions;  // strictly increasing
  std::vector<double> masses;     // positive
  std::vector<double> prefix;     // prefix[i] = sum of masses[0..i]

  static EmpiricalMeasure from_state(const ClusterState& state);
  double cdf(double x) const;  // right-continuous cumulative
  double total_mass() const { return prefix.empty() ? 0.0 : prefix.back(); }
};

enum class ProcessKind { Z1, Z2, Z3, Z4, Y };

const char* to_string(ProcessKind k);

/// Block velocity equals the mass-weighted mean of member velocities.
CheckReport check_velocity_conditional(const ParticleSystem& sys, double t);

/// Backward tower property of the velocity along particle trajectories:
/// each time-t block velocity is the mass-weighted mean of the velocities of
/// the time-s blocks it is composed of (0 <= s < t). Throws logic_error if
/// the time-s partition fails to refine the time-t partition.
/// `inject_block_velocity_bias` is a fault-injection hook: it perturbs every
/// multi-particle block velocity at time t before comparison, so a nonzero
/// value must make the check fail.
CheckReport check_martingale_X(const ParticleSystem& sys, double s, double t,
                               double inject_block_velocity_bias = 0.0);

/// Backward martingale of the drift-corrected velocity along a turbulence
/// process. Conditional expectations are exact finite sums over the full
/// particle mass; samples restrict nothing but are validated as particle
/// positions. The pre-shock indicator uses the first shock time of the
/// process anchor (the particle at Z0), which is measurable with respect to
/// Z0 and makes the tower identity exact at finite n; the sample's own
/// first shock time agrees with it up to discretization.
CheckReport check_semimartingale_Z(const ParticleSystem& sys,
                                   const TurbulenceReport& report,
                                   ProcessKind which,
                                   const std::vector<double>& samples,
                                   const std::vector<double>& grid);

/// Driftless tower residual of the velocity field along the process, plus
/// the equivalence: residual vanishes (<= tol) iff every turbulent interval
/// born within the grid horizon is a point and the process coincides with
/// the particle trajectory. `pass` reflects the equivalence; `residual` is
/// the driftless tower residual itself.
CheckReport check_martingale_iff_degenerate(const ParticleSystem& sys,
                                            const TurbulenceReport& report,
                                            ProcessKind which,
                                            const std::vector<double>& grid,
                                            double tol = 1e-12);

/// Sum over blocks of mass * psi(block velocity) at each grid time; fills
/// `report` with the monotone non-increase check (slack >= -1e-12).
std::vector<double> dissipation_profile(const ParticleSystem& sys,
                                        const ConvexTestFunction& psi,
                                        const std::vector<double>& grid,
                                        CheckReport* report);

/// Pushforward of the uniform initial measure under the flow versus the
/// signed-measure prediction (uniform minus t times the space derivative of
/// the velocity field), compared through cumulative functions in sup norm.
/// Requires a system discretizing the uniform measure.
CheckReport burgers_consistency(const ParticleSystem& sys, double t,
                                double tolerance_constant = 8.0);

/// Analogue for the Stieltjes initial measure -du0 of a non-increasing
/// profile, including random interval-mass spot checks
/// mu_t([a,b]) = u_t(a-) - u_t(b+).
CheckReport stieltjes_case_consistency(const VelocityProfile& prof,
                                       std::size_t n, double t,
                                       double tolerance_constant = 8.0);

/// Entropy-solution velocity by direct minimization of
/// G(a) = U0(a) + (x-a)^2 / (2t) over a refined grid with golden-section
/// polishing; returns (x - a*) / t.
double lax_oleinik_oracle(const VelocityProfile& prof, Interval window,
                          double x, double t, std::size_t grid_points);

}  // namespace adhesion
