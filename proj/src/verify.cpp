#include "adhesion/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adhesion {

namespace {

std::string worst_pair_note(double t, double t_next, double value) {
  return "worst pair (" + format_double(t) + ", " + format_double(t_next) +
         "), deviation " + format_double(value);
}

}  // namespace

ConvexTestFunction::ConvexTestFunction(std::string name,
                                       std::function<double(double)> fn,
                                       Interval screen_range)
    : name_(std::move(name)), fn_(std::move(fn)) {
  const int kPoints = 1000;
  double lo = screen_range.lo, hi = screen_range.hi;
  if (!(hi > lo)) throw std::invalid_argument("empty convexity screen range");
  double scale = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    double x = lo + (hi - lo) * i / (kPoints - 1);
    scale = std::max(scale, std::abs(fn_(x)));
  }
  double tol = 1e-9 * std::max(1.0, scale);
  for (int i = 0; i + 1 < kPoints; ++i) {
    double x0 = lo + (hi - lo) * i / (kPoints - 1);
    double x1 = lo + (hi - lo) * (i + 1) / (kPoints - 1);
    double mid = 0.5 * (x0 + x1);
    if (fn_(mid) > 0.5 * (fn_(x0) + fn_(x1)) + tol) {
      throw std::invalid_argument("test function fails midpoint convexity: " +
                                  name_);
    }
  }
}

ConvexTestFunction ConvexTestFunction::square() {
  return {"square", [](double x) { return x * x; }, {-8.0, 8.0}};
}

ConvexTestFunction ConvexTestFunction::absolute() {
  return {"abs", [](double x) { return std::abs(x); }, {-8.0, 8.0}};
}

ConvexTestFunction ConvexTestFunction::exp_scaled(double k) {
  return {"exp-scaled(" + format_double(k) + ")",
          [k](double x) { return std::exp(k * x); },
          {-8.0, 8.0}};
}

ConvexTestFunction ConvexTestFunction::hinge(double c) {
  return {"max(0,x-" + format_double(c) + ")",
          [c](double x) { return std::max(0.0, x - c); },
          {-8.0, 8.0}};
}

ConvexTestFunction ConvexTestFunction::custom(
    std::string name, std::function<double(double)> fn, Interval screen_range) {
  return {std::move(name), std::move(fn), screen_range};
}

EmpiricalMeasure EmpiricalMeasure::from_state(const ClusterState& state) {
  EmpiricalMeasure em;
  em.positions.reserve(state.blocks.size());
  em.masses.reserve(state.blocks.size());
  em.prefix.reserve(state.blocks.size());
  double run = 0.0;
  for (const Block& b : state.blocks) {
    em.positions.push_back(b.x);
    em.masses.push_back(b.mass);
    run += b.mass;
    em.prefix.push_back(run);
  }
  return em;
}

double EmpiricalMeasure::cdf(double x) const {
  auto it = std::upper_bound(positions.begin(), positions.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - positions.begin());
  return idx == 0 ? 0.0 : prefix[idx - 1];
}

const char* to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::Z1: return "Z1";
    case ProcessKind::Z2: return "Z2";
    case ProcessKind::Z3: return "Z3";
    case ProcessKind::Z4: return "Z4";
    case ProcessKind::Y: return "Y";
  }
  return "?";
}

CheckReport check_velocity_conditional(const ParticleSystem& sys, double t) {
  ClusterState state = cluster_at(sys, t);
  double residual = 0.0;
  std::size_t worst = 0;
  for (std::size_t k = 0; k < state.blocks.size(); ++k) {
    const Block& b = state.blocks[k];
    long double mv = 0.0L, mm = 0.0L;
    for (std::size_t i = b.first; i <= b.last; ++i) {
      mv += static_cast<long double>(sys.m[i]) * sys.v[i];
      mm += sys.m[i];
    }
    double dev = std::abs(b.w - static_cast<double>(mv / mm));
    if (dev > residual) {
      residual = dev;
      worst = k;
    }
  }
  CheckReport r;
  r.name = "velocity_conditional(t=" + format_double(t) + ")";
  r.residual = residual;
  r.tolerance = 1e-12;
  r.pass = residual <= r.tolerance;
  r.diagnostics = "worst block " + std::to_string(worst) + " of " +
                  std::to_string(state.blocks.size());
  return r;
}

CheckReport check_martingale_X(const ParticleSystem& sys, double s, double t,
                               double inject_block_velocity_bias) {
  if (!(s >= 0.0 && s < t)) {
    throw std::invalid_argument("need 0 <= s < t");
  }
  ClusterState at_s = cluster_at(sys, s);
  ClusterState at_t = cluster_at(sys, t);
  if (inject_block_velocity_bias != 0.0) {
    for (Block& b : at_t.blocks) {
      if (b.size() > 1) b.w += inject_block_velocity_bias;
    }
  }
  for (const Block& b : at_s.blocks) {
    if (at_t.block_of[b.first] != at_t.block_of[b.last]) {
      throw std::logic_error("earlier partition does not refine later one");
    }
  }
  double residual = 0.0;
  std::size_t worst = 0;
  std::size_t sk = 0;
  for (std::size_t k = 0; k < at_t.blocks.size(); ++k) {
    const Block& B = at_t.blocks[k];
    long double acc = 0.0L;
    while (sk < at_s.blocks.size() && at_s.blocks[sk].last <= B.last) {
      const Block& b = at_s.blocks[sk];
      acc += static_cast<long double>(b.mass) * b.w;
      ++sk;
    }
    double dev = std::abs(B.w - static_cast<double>(acc / B.mass));
    if (dev > residual) {
      residual = dev;
      worst = k;
    }
  }
  CheckReport r;
  r.name = "martingale_X(s=" + format_double(s) + ",t=" + format_double(t) + ")";
  r.residual = residual;
  r.tolerance = 1e-12;
  r.pass = residual <= r.tolerance;
  r.diagnostics = "worst block " + std::to_string(worst);
  return r;
}

namespace {

std::size_t sample_particle(const ParticleSystem& sys, double x0) {
  auto it = std::lower_bound(sys.a.begin(), sys.a.end(), x0);
  std::size_t best = sys.size();
  double best_d = kInfTime;
  for (long k = static_cast<long>(it - sys.a.begin()) - 1;
       k <= static_cast<long>(it - sys.a.begin()); ++k) {
    if (k < 0 || k >= static_cast<long>(sys.size())) continue;
    double d = std::abs(sys.a[k] - x0);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(k);
    }
  }
  if (best == sys.size() || best_d > position_tolerance(sys)) {
    throw std::invalid_argument("sample point is not a particle position");
  }
  return best;
}

/// Particle index holding the initial value Z0 for each particle's process.
std::vector<std::size_t> process_anchors(const ParticleSystem& sys,
                                         const TurbulenceReport& report,
                                         ProcessKind which) {
  const std::size_t n = sys.size();
  std::vector<std::size_t> anchor(n);
  double tol = position_tolerance(sys);
  for (std::size_t i = 0; i < n; ++i) {
    const TurbulentInterval& iv =
        report.intervals[report.interval_of[i]];
    switch (which) {
      case ProcessKind::Z1: anchor[i] = iv.first; break;
      case ProcessKind::Z2: anchor[i] = iv.last; break;
      case ProcessKind::Z3: anchor[i] = iv.cluster_first; break;
      case ProcessKind::Z4: anchor[i] = iv.cluster_last; break;
      case ProcessKind::Y: {
        EntrySide side = classify_entry_side(
            sys.a[iv.first], sys.a[iv.last], sys.a[iv.cluster_first],
            sys.a[iv.cluster_last], sys.a[i], tol);
        anchor[i] = (side == EntrySide::Left) ? iv.cluster_first
                                              : iv.cluster_last;
        break;
      }
    }
  }
  return anchor;
}

/// E[u0(X0) | Z0]: mass-weighted mean of v over particles sharing an anchor.
std::vector<double> initial_conditionals(const ParticleSystem& sys,
                                         const std::vector<std::size_t>& anchor) {
  const std::size_t n = sys.size();
  std::vector<double> sum_mv(n, 0.0), sum_m(n, 0.0), cond(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum_mv[anchor[i]] += sys.m[i] * sys.v[i];
    sum_m[anchor[i]] += sys.m[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sum_m[i] > 0.0) cond[i] = sum_mv[i] / sum_m[i];
  }
  return cond;
}

/// E[u0(X0) | Z_t]: mass-weighted mean of v grouped by the block holding the
/// anchor at time t.
std::vector<double> atom_conditionals(const ParticleSystem& sys,
                                      const std::vector<std::size_t>& anchor,
                                      const ClusterState& state) {
  std::vector<double> sum_mv(state.blocks.size(), 0.0);
  std::vector<double> sum_m(state.blocks.size(), 0.0);
  for (std::size_t i = 0; i < sys.size(); ++i) {
    std::size_t b = state.block_of[anchor[i]];
    sum_mv[b] += sys.m[i] * sys.v[i];
    sum_m[b] += sys.m[i];
  }
  for (std::size_t b = 0; b < sum_mv.size(); ++b) {
    if (sum_m[b] > 0.0) sum_mv[b] /= sum_m[b];
  }
  return sum_mv;
}

}  // namespace

CheckReport check_semimartingale_Z(const ParticleSystem& sys,
                                   const TurbulenceReport& report,
                                   ProcessKind which,
                                   const std::vector<double>& samples,
                                   const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("grid needs >= 2 times");
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    if (!(grid[g] < grid[g + 1])) {
      throw std::invalid_argument("grid must be increasing");
    }
  }
  for (double x0 : samples) sample_particle(sys, x0);

  const std::size_t n = sys.size();
  std::vector<std::size_t> anchor = process_anchors(sys, report, which);
  std::vector<double> gamma(n);
  for (std::size_t i = 0; i < n; ++i) gamma[i] = report.tau(anchor[i]);
  std::vector<double> cond0 = initial_conditionals(sys, anchor);

  std::vector<ClusterState> states;
  states.reserve(grid.size());
  for (double t : grid) states.push_back(cluster_at(sys, t));
  std::vector<std::vector<double>> cond(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    cond[g] = atom_conditionals(sys, anchor, states[g]);
  }

  auto martingale = [&](std::size_t g, std::size_t i) {
    if (grid[g] < gamma[i]) return cond0[anchor[i]];
    return cond[g][states[g].block_of[anchor[i]]];
  };

  double residual = 0.0;
  std::string worst;
  // Tower property across consecutive grid times: the mass-weighted mean of
  // M at the earlier time over each later-time atom equals M there.
  std::vector<double> acc_mv, acc_m, later_lo, later_hi;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const ClusterState& st = states[g + 1];
    std::size_t nb = st.blocks.size();
    acc_mv.assign(nb, 0.0);
    acc_m.assign(nb, 0.0);
    later_lo.assign(nb, kInfTime);
    later_hi.assign(nb, -kInfTime);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t b = st.block_of[anchor[i]];
      acc_mv[b] += sys.m[i] * martingale(g, i);
      acc_m[b] += sys.m[i];
      double later = martingale(g + 1, i);
      later_lo[b] = std::min(later_lo[b], later);
      later_hi[b] = std::max(later_hi[b], later);
    }
    for (std::size_t b = 0; b < nb; ++b) {
      if (!(acc_m[b] > 0.0)) continue;
      double dev = std::max(std::abs(acc_mv[b] / acc_m[b] - later_lo[b]),
                            later_hi[b] - later_lo[b]);
      if (dev > residual) {
        residual = dev;
        worst = worst_pair_note(grid[g], grid[g + 1], dev);
      }
    }
  }

  // Pre-shock part: before the anchor's first shock the process free-flies,
  // so the field value along it is the initial velocity (zero-variation
  // drift-corrected part).
  double bv_residual = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      if (grid[g] >= gamma[i]) continue;
      double field = states[g].block_of_particle(anchor[i]).w;
      bv_residual = std::max(bv_residual, std::abs(field - sys.v[anchor[i]]));
    }
  }
  residual = std::max(residual, bv_residual);

  CheckReport r;
  r.name = std::string("semimartingale_") + to_string(which);
  r.residual = residual;
  r.tolerance = 1e-12;
  r.pass = residual <= r.tolerance;
  r.diagnostics = worst.empty() ? "no nondegenerate atoms" : worst;
  r.diagnostics += "; pre-shock part residual " + format_double(bv_residual);
  return r;
}

CheckReport check_martingale_iff_degenerate(const ParticleSystem& sys,
                                            const TurbulenceReport& report,
                                            ProcessKind which,
                                            const std::vector<double>& grid,
                                            double tol) {
  if (grid.size() < 2) throw std::invalid_argument("grid needs >= 2 times");
  const std::size_t n = sys.size();
  std::vector<std::size_t> anchor = process_anchors(sys, report, which);

  std::vector<ClusterState> states;
  states.reserve(grid.size());
  for (double t : grid) states.push_back(cluster_at(sys, t));

  // Driftless tower residual of the raw field value along the process.
  double residual = 0.0;
  std::string worst;
  std::vector<double> acc_mv, acc_m;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const ClusterState& st = states[g + 1];
    std::size_t nb = st.blocks.size();
    acc_mv.assign(nb, 0.0);
    acc_m.assign(nb, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t b = st.block_of[anchor[i]];
      acc_mv[b] += sys.m[i] * states[g].block_of_particle(anchor[i]).w;
      acc_m[b] += sys.m[i];
    }
    for (std::size_t b = 0; b < nb; ++b) {
      if (!(acc_m[b] > 0.0)) continue;
      double later = st.blocks[b].w;
      double dev = std::abs(acc_mv[b] / acc_m[b] - later);
      if (dev > residual) {
        residual = dev;
        worst = worst_pair_note(grid[g], grid[g + 1], dev);
      }
    }
  }

  // Degeneracy in the almost-everywhere sense: mass of particles whose
  // turbulence happens within the horizon and that either sit in a
  // non-point interval or track an anchor other than themselves.  A point
  // shock of the limiting profile discretizes to a two-particle cluster, so
  // up to two particles' worth of mass is discretization noise, not a
  // genuine non-point interval.
  double violation_mass = 0.0;
  double max_particle_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_particle_mass = std::max(max_particle_mass, sys.m[i]);
  }
  for (const TurbulentInterval& iv : report.intervals) {
    if (!(iv.tau <= grid.back())) continue;
    for (std::size_t i = iv.first; i <= iv.last; ++i) {
      if (iv.first != iv.last || anchor[i] != i) violation_mass += sys.m[i];
    }
  }
  bool degenerate = violation_mass <= 2.0 * max_particle_mass;
  bool vanishes = residual <= tol;

  CheckReport r;
  r.name = std::string("martingale_iff_degenerate_") + to_string(which);
  r.residual = residual;
  r.tolerance = tol;
  r.pass = (vanishes == degenerate);
  r.diagnostics = std::string("driftless residual ") + format_double(residual) +
                  "; deviating mass " + format_double(violation_mass) +
                  (degenerate ? "; degenerate (Z == X up to discretization)"
                              : "; nondegenerate") +
                  (worst.empty() ? "" : "; " + worst);
  return r;
}

std::vector<double> dissipation_profile(const ParticleSystem& sys,
                                        const ConvexTestFunction& psi,
                                        const std::vector<double>& grid,
                                        CheckReport* report) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (double t : grid) {
    ClusterState state = cluster_at(sys, t);
    long double acc = 0.0L;
    for (const Block& b : state.blocks) acc += b.mass * psi(b.w);
    values.push_back(static_cast<double>(acc));
  }
  if (report != nullptr) {
    double residual = 0.0;
    std::string worst;
    for (std::size_t g = 0; g + 1 < values.size(); ++g) {
      double rise = values[g + 1] - values[g];
      if (rise > residual) {
        residual = rise;
        worst = worst_pair_note(grid[g], grid[g + 1], rise);
      }
    }
    report->name = "dissipation(" + psi.name() + ")";
    report->residual = residual;
    report->tolerance = 1e-12;
    report->pass = residual <= report->tolerance;
    report->diagnostics = worst.empty() ? "monotone" : worst;
  }
  return values;
}

namespace {

struct CumulativeComparison {
  double sup = 0.0;
  double worst_x = 0.0;
};

/// Right-continuous one-sided velocity representative: the initial velocity
/// of the last member at a block position, linearly interpolated between the
/// last/first member velocities across inter-block gaps. Using the one-sided
/// limits (rather than block velocities) keeps the signed-measure prediction
/// exact between blocks and concentrates each shock's atom at its block.
double right_limit_field(const ParticleSystem& sys, const ClusterState& state,
                         double x) {
  double tol = position_tolerance(sys);
  std::size_t k = state.find_block_at(x, tol);
  if (k != ClusterState::npos) return sys.v[state.blocks[k].last];
  if (x < state.blocks.front().x) return sys.v.front();
  if (x > state.blocks.back().x) return sys.v.back();
  auto it = std::lower_bound(
      state.blocks.begin(), state.blocks.end(), x,
      [](const Block& b, double value) { return b.x < value; });
  std::size_t hi = static_cast<std::size_t>(it - state.blocks.begin());
  std::size_t lo = hi - 1;
  double theta = (x - state.blocks[lo].x) /
                 (state.blocks[hi].x - state.blocks[lo].x);
  double u_lo = sys.v[state.blocks[lo].last];
  double u_hi = sys.v[state.blocks[hi].first];
  return (1.0 - theta) * u_lo + theta * u_hi;
}

/// Sup distance between the empirical cumulative and a prediction, evaluated
/// at block positions (right-continuously) and midpoints between blocks.
CumulativeComparison compare_cumulatives(
    const EmpiricalMeasure& em, const std::function<double(double)>& pred) {
  CumulativeComparison out;
  auto probe = [&](double x, double emp) {
    double d = std::abs(emp - pred(x));
    if (d > out.sup) {
      out.sup = d;
      out.worst_x = x;
    }
  };
  for (std::size_t k = 0; k < em.positions.size(); ++k) {
    probe(em.positions[k], em.prefix[k]);
    if (k + 1 < em.positions.size()) {
      probe(0.5 * (em.positions[k] + em.positions[k + 1]), em.prefix[k]);
    }
  }
  return out;
}

}  // namespace

CheckReport burgers_consistency(const ParticleSystem& sys, double t,
                                double tolerance_constant) {
  if (!sys.lambda_provenance()) {
    throw std::invalid_argument(
        "identity requires a uniform initial measure");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  ClusterState state = cluster_at(sys, t);
  EmpiricalMeasure em = EmpiricalMeasure::from_state(state);
  double xi0 = em.positions.front();
  double u_left = sys.v.front();
  auto pred = [&](double x) {
    return (x - xi0) - t * (right_limit_field(sys, state, x) - u_left);
  };
  CumulativeComparison cmp = compare_cumulatives(em, pred);
  CheckReport r;
  r.name = "burgers_consistency(t=" + format_double(t) + ")";
  r.residual = cmp.sup;
  r.tolerance = tolerance_constant / static_cast<double>(sys.size());
  r.pass = r.residual <= r.tolerance;
  r.diagnostics = "worst at x=" + format_double(cmp.worst_x) + ", n=" +
                  std::to_string(sys.size());
  return r;
}

CheckReport stieltjes_case_consistency(const VelocityProfile& prof,
                                       std::size_t n, double t,
                                       double tolerance_constant) {
  if (!prof.non_increasing()) {
    throw std::invalid_argument("profile must be non-increasing");
  }
  MassDistribution dist = stieltjes_distribution_from(prof);
  ParticleSystem sys = discretize(dist, prof, n);
  ClusterState state = cluster_at(sys, t);
  EmpiricalMeasure em = EmpiricalMeasure::from_state(state);
  double u_left = sys.v.front();
  auto pred = [&](double x) {
    return u_left - right_limit_field(sys, state, x);
  };
  CumulativeComparison cmp = compare_cumulatives(em, pred);

  // Interval-mass identity mu_t((a,b]) = u_t(a+) - u_t(b+) on random
  // intervals spanning the matter.
  SplitMix64 rng(0x51e11e5u);
  double lo = em.positions.front(), hi = em.positions.back();
  double spot = 0.0;
  for (int k = 0; k < 100; ++k) {
    double a = lo + (hi - lo) * rng.next_unit();
    double b = lo + (hi - lo) * rng.next_unit();
    if (a > b) std::swap(a, b);
    double mass = em.cdf(b) - em.cdf(a);
    double drop = right_limit_field(sys, state, a) -
                  right_limit_field(sys, state, b);
    spot = std::max(spot, std::abs(mass - drop));
  }

  CheckReport r;
  r.name = "stieltjes_consistency(t=" + format_double(t) + ")";
  r.residual = std::max(cmp.sup, spot);
  double scale = std::max(1.0, em.total_mass());
  r.tolerance = tolerance_constant * scale / static_cast<double>(sys.size());
  r.pass = r.residual <= r.tolerance;
  r.diagnostics = "sup " + format_double(cmp.sup) + ", spot " +
                  format_double(spot) + ", worst x=" +
                  format_double(cmp.worst_x);
  return r;
}

double lax_oleinik_oracle(const VelocityProfile& prof, Interval window,
                          double x, double t, std::size_t grid_points) {
  if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
  if (grid_points < 8) throw std::invalid_argument("grid too coarse");
  double bound = 0.0;
  for (int k = 0; k <= 64; ++k) {
    double a = window.lo + window.width() * k / 64.0;
    bound = std::max(bound, std::abs(prof.eval(a)));
  }
  double lo = std::min(window.lo, x) - t * bound - 1e-9;
  double hi = std::max(window.hi, x) + t * bound + 1e-9;

  auto G = [&](double a) {
    double d = x - a;
    return prof.antiderivative(a) + d * d / (2.0 * t);
  };

  std::size_t best = 0;
  double best_val = kInfTime;
  double step = (hi - lo) / static_cast<double>(grid_points);
  for (std::size_t k = 0; k <= grid_points; ++k) {
    double a = lo + step * static_cast<double>(k);
    double val = G(a);
    if (val < best_val) {
      best_val = val;
      best = k;
    }
  }
  double a_lo = lo + step * static_cast<double>(best > 0 ? best - 1 : 0);
  double a_hi = lo + step * static_cast<double>(
                         best + 1 <= grid_points ? best + 1 : grid_points);
  // Golden-section polish on the bracketing cell pair.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = a_hi - phi * (a_hi - a_lo);
  double d = a_lo + phi * (a_hi - a_lo);
  double fc = G(c), fd = G(d);
  for (int it = 0; it < 200 && (a_hi - a_lo) > 1e-14 * (hi - lo); ++it) {
    if (fc <= fd) {
      a_hi = d;
      d = c;
      fd = fc;
      c = a_hi - phi * (a_hi - a_lo);
      fc = G(c);
    } else {
      a_lo = c;
      c = d;
      fc = fd;
      d = a_lo + phi * (a_hi - a_lo);
      fd = G(d);
    }
  }
  double a_star = 0.5 * (a_lo + a_hi);
  return (x - a_star) / t;
}

}  // namespace adhesion
