#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adhesion/common.hpp"

namespace adhesion {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct DensityPiece {
  Interval interval;  // [lo, hi)
  double density = 0.0;
};

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

/// Initial mass measure: piecewise-constant density plus finitely many atoms
/// on a declared window. Outside the window the matter is treated as
/// unit-density filler, so the support has no gaps on the whole line.
class MassDistribution {
 public:
  MassDistribution(std::vector<DensityPiece> pieces, std::vector<Atom> atoms,
                   Interval window);

  static MassDistribution lebesgue(Interval window);

  const std::vector<DensityPiece>& pieces() const { return pieces_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Interval& window() const { return window_; }

  /// mu([window.lo, x]) for x inside the window.
  double cumulative(double x) const;
  /// mu([a, b]) for [a, b] inside the window.
  double mass(double a, double b) const;
  double total_mass() const { return cumulative(window_.hi); }
  /// Smallest x with cumulative(x) >= q. Exact inversion of the piecewise
  /// cumulative function; lands on atom positions for q inside an atom.
  double quantile(double q) const;

  /// Uniform density 1 everywhere (within and outside the window)?
  bool is_lebesgue() const;

 private:
  std::vector<DensityPiece> pieces_;
  std::vector<Atom> atoms_;
  Interval window_;
};

struct AffineSegment {
  double slope = 0.0;
  double intercept = 0.0;
  double at(double x) const { return slope * x + intercept; }
};

/// Initial velocity u0. The main representation is piecewise linear with
/// breakpoints (jumps allowed); an analytic strictly-decreasing profile
/// (scaled -arctan) is supported for smooth-velocity scenarios.
class VelocityProfile {
 public:
  /// segments.size() == breakpoints.size() + 1; outermost slopes must be 0.
  VelocityProfile(std::vector<double> breakpoints,
                  std::vector<AffineSegment> segments);

  static VelocityProfile constant(double c);
  /// u0(x) = -scale * atan(x). Strictly decreasing, flat-ish tails.
  static VelocityProfile neg_arctan(double scale);

  double eval(double x) const;        // cadlag at breakpoints
  double left_limit(double x) const;
  double right_limit(double x) const;
  /// Antiderivative with U(0) = 0.
  double antiderivative(double x) const;

  bool is_piecewise() const { return !analytic_; }
  bool non_increasing() const;
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<AffineSegment>& segments() const { return segments_; }
  double jump_height(double breakpoint) const;  // left - right

 private:
  VelocityProfile() = default;
  int segment_index(double x) const;

  std::vector<double> breakpoints_;
  std::vector<AffineSegment> segments_;
  bool analytic_ = false;
  double analytic_scale_ = 0.0;
};

struct NjcViolation {
  double position = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<NjcViolation> violations;
};

/// Sorted finite discretization of (mu0, u0).
struct ParticleSystem {
  std::vector<double> a;  // strictly increasing initial positions
  std::vector<double> m;  // masses > 0
  std::vector<double> v;  // velocities, v[i] = u0 at a[i]

  std::shared_ptr<const MassDistribution> dist;
  std::shared_ptr<const VelocityProfile> prof;
  Interval window;  // the discretized sub-window

  std::size_t size() const { return a.size(); }
  double total_mass() const;
  double total_momentum() const;
  bool lambda_provenance() const { return dist && dist->is_lebesgue(); }
};

/// Lists every breakpoint where the left limit is below the right limit, and
/// checks u- >= u >= u+ at the atoms of the distribution.
ValidationReport validate_njc(const MassDistribution& dist,
                              const VelocityProfile& prof);

/// Mass-quantile midpoint discretization of dist restricted to `window`.
/// Atoms heavier than total/n become single particles of exact atom mass;
/// a particle landing on a velocity jump is split into a left/right pair
/// straddling the breakpoint by 1e-12 * window width.
ParticleSystem discretize(const MassDistribution& dist,
                          const VelocityProfile& prof, std::size_t n,
                          Interval window);

ParticleSystem discretize(const MassDistribution& dist,
                          const VelocityProfile& prof, std::size_t n);

/// mu0 = -du0 for a non-increasing profile: density pieces from the slopes,
/// atoms at the downward jumps.
MassDistribution stieltjes_distribution_from(const VelocityProfile& prof);

}  // namespace adhesion
