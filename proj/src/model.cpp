#include "adhesion/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adhesion {

namespace {
constexpr double kCoverTol = 1e-12;
}

MassDistribution::MassDistribution(std::vector<DensityPiece> pieces,
                                   std::vector<Atom> atoms, Interval window)
    : pieces_(std::move(pieces)), atoms_(std::move(atoms)), window_(window) {
  if (window_.hi < window_.lo) {
    throw std::invalid_argument("distribution window is inverted");
  }
  std::sort(pieces_.begin(), pieces_.end(),
            [](const DensityPiece& x, const DensityPiece& y) {
              return x.interval.lo < y.interval.lo;
            });
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& x, const Atom& y) { return x.position < y.position; });
  for (const auto& p : pieces_) {
    if (p.interval.hi < p.interval.lo) {
      throw std::invalid_argument("density piece interval is inverted");
    }
    if (p.density < 0.0) {
      throw std::invalid_argument("negative density");
    }
    if (p.interval.lo < window_.lo - kCoverTol ||
        p.interval.hi > window_.hi + kCoverTol) {
      throw std::invalid_argument("density piece outside the window");
    }
  }
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (pieces_[i].interval.lo < pieces_[i - 1].interval.hi - kCoverTol) {
      throw std::invalid_argument("overlapping density pieces");
    }
  }
  for (const auto& at : atoms_) {
    if (at.mass <= 0.0) {
      throw std::invalid_argument("atom mass must be positive");
    }
    if (!window_.contains(at.position)) {
      throw std::invalid_argument("atom outside the window");
    }
  }
  // No vacuum: positive-density pieces and atoms must cover the window
  // without interior gaps.
  double gap_tol = kCoverTol * std::max(1.0, window_.width());
  double covered = window_.lo;
  std::size_t ai = 0;
  for (const auto& p : pieces_) {
    if (p.density <= 0.0) continue;
    while (ai < atoms_.size() && atoms_[ai].position <= p.interval.lo + gap_tol) {
      covered = std::max(covered, atoms_[ai].position);
      ++ai;
    }
    if (p.interval.lo > covered + gap_tol) {
      throw std::invalid_argument("vacuum inside the window is not supported");
    }
    covered = std::max(covered, p.interval.hi);
  }
  while (ai < atoms_.size()) {
    if (atoms_[ai].position > covered + gap_tol) {
      throw std::invalid_argument("vacuum inside the window is not supported");
    }
    covered = std::max(covered, atoms_[ai].position);
    ++ai;
  }
  if (covered < window_.hi - gap_tol) {
    throw std::invalid_argument("vacuum inside the window is not supported");
  }
}

MassDistribution MassDistribution::lebesgue(Interval window) {
  return MassDistribution({DensityPiece{window, 1.0}}, {}, window);
}

double MassDistribution::cumulative(double x) const {
  double s = 0.0;
  for (const auto& p : pieces_) {
    if (x <= p.interval.lo) break;
    s += p.density * (std::min(x, p.interval.hi) - p.interval.lo);
  }
  for (const auto& at : atoms_) {
    if (at.position <= x) s += at.mass;
  }
  return s;
}

double MassDistribution::mass(double a, double b) const {
  if (b < a) return 0.0;
  double s = 0.0;
  for (const auto& p : pieces_) {
    double lo = std::max(a, p.interval.lo);
    double hi = std::min(b, p.interval.hi);
    if (hi > lo) s += p.density * (hi - lo);
  }
  for (const auto& at : atoms_) {
    if (at.position >= a && at.position <= b) s += at.mass;
  }
  return s;
}

bool MassDistribution::is_lebesgue() const {
  if (!atoms_.empty()) return false;
  double covered = window_.lo;
  for (const auto& p : pieces_) {
    if (p.density != 1.0) return false;
    covered = std::max(covered, p.interval.hi);
  }
  return covered >= window_.hi - kCoverTol * std::max(1.0, window_.width());
}

double MassDistribution::quantile(double q) const {
  if (q < 0.0) throw std::invalid_argument("quantile target below zero");
  // Merge pieces and atoms in position order, accumulating mass.
  double acc = 0.0;
  std::size_t pi = 0, ai = 0;
  double last = window_.lo;
  while (pi < pieces_.size() || ai < atoms_.size()) {
    bool take_atom =
        ai < atoms_.size() &&
        (pi >= pieces_.size() || atoms_[ai].position <= pieces_[pi].interval.lo);
    if (take_atom) {
      const Atom& at = atoms_[ai];
      // Atoms inside a density piece are handled when walking the piece.
      bool inside_piece = pi < pieces_.size() &&
                          at.position > pieces_[pi].interval.lo &&
                          at.position < pieces_[pi].interval.hi;
      if (!inside_piece) {
        if (q <= acc + at.mass) return at.position;
        acc += at.mass;
        last = at.position;
        ++ai;
        continue;
      }
    }
    if (pi < pieces_.size()) {
      const DensityPiece& p = pieces_[pi];
      double x = p.interval.lo;
      while (ai < atoms_.size() && atoms_[ai].position < p.interval.hi) {
        const Atom& at = atoms_[ai];
        if (at.position < x) { ++ai; continue; }
        double seg_mass = p.density * (at.position - x);
        if (q <= acc + seg_mass && p.density > 0.0) {
          return x + (q - acc) / p.density;
        }
        acc += seg_mass;
        if (q <= acc + at.mass) return at.position;
        acc += at.mass;
        x = at.position;
        ++ai;
      }
      double seg_mass = p.density * (p.interval.hi - x);
      if (q <= acc + seg_mass && p.density > 0.0) {
        return x + (q - acc) / p.density;
      }
      acc += seg_mass;
      last = p.interval.hi;
      ++pi;
    }
  }
  return last;
}

VelocityProfile::VelocityProfile(std::vector<double> breakpoints,
                                 std::vector<AffineSegment> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
  if (segments_.size() != breakpoints_.size() + 1) {
    throw std::invalid_argument("need one segment more than breakpoints");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i - 1] < breakpoints_[i])) {
      throw std::invalid_argument("breakpoints must be strictly increasing");
    }
  }
  if (segments_.front().slope != 0.0 || segments_.back().slope != 0.0) {
    throw std::invalid_argument(
        "outermost segments must be flat (sublinear growth)");
  }
}

VelocityProfile VelocityProfile::constant(double c) {
  return VelocityProfile({}, {AffineSegment{0.0, c}});
}

VelocityProfile VelocityProfile::neg_arctan(double scale) {
  VelocityProfile p;
  p.analytic_ = true;
  p.analytic_scale_ = scale;
  return p;
}

int VelocityProfile::segment_index(double x) const {
  // cadlag: x == breakpoint belongs to the segment on the right.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  auto lo = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (lo != breakpoints_.end() && *lo == x) {
    return static_cast<int>(lo - breakpoints_.begin()) + 1;
  }
  return static_cast<int>(it - breakpoints_.begin());
}

double VelocityProfile::eval(double x) const {
  if (analytic_) return -analytic_scale_ * std::atan(x);
  return segments_[segment_index(x)].at(x);
}

double VelocityProfile::left_limit(double x) const {
  if (analytic_) return eval(x);
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it != breakpoints_.end() && *it == x) {
    return segments_[it - breakpoints_.begin()].at(x);
  }
  return eval(x);
}

double VelocityProfile::right_limit(double x) const { return eval(x); }

double VelocityProfile::jump_height(double b) const {
  return left_limit(b) - right_limit(b);
}

double VelocityProfile::antiderivative(double x) const {
  if (analytic_) {
    return -analytic_scale_ *
           (x * std::atan(x) - 0.5 * std::log1p(x * x));
  }
  auto seg_integral = [](const AffineSegment& s, double a, double b) {
    return 0.5 * s.slope * (b * b - a * a) + s.intercept * (b - a);
  };
  if (breakpoints_.empty()) return seg_integral(segments_[0], 0.0, x);
  // Anchor at the first breakpoint, then shift so U(0) = 0.
  auto value_from_anchor = [&](double y) {
    double u = 0.0;
    double anchor = breakpoints_.front();
    if (y >= anchor) {
      double prev = anchor;
      for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        double next = (i + 1 < breakpoints_.size()) ? breakpoints_[i + 1]
                                                    : std::max(y, prev);
        double hi = std::min(y, next);
        if (hi > prev) u += seg_integral(segments_[i + 1], prev, hi);
        if (y <= next) break;
        prev = next;
      }
      if (y > breakpoints_.back()) {
        // handled above by the max() bound
      }
    } else {
      u = -seg_integral(segments_[0], y, anchor);
    }
    return u;
  };
  return value_from_anchor(x) - value_from_anchor(0.0);
}

bool VelocityProfile::non_increasing() const {
  if (analytic_) return true;
  for (const auto& s : segments_) {
    if (s.slope > 0.0) return false;
  }
  for (double b : breakpoints_) {
    if (jump_height(b) < 0.0) return false;
  }
  return true;
}

namespace {

// Neumaier-compensated sum: keeps the mass audit meaningful at n ~ 1e5,
// where a naive accumulation drifts by ~n*eps.
double compensated_sum(const std::vector<double>& xs, const double* weights) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x = weights ? xs[i] * weights[i] : xs[i];
    double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

double ParticleSystem::total_mass() const {
  return compensated_sum(m, nullptr);
}

double ParticleSystem::total_momentum() const {
  return compensated_sum(m, v.data());
}

ValidationReport validate_njc(const MassDistribution& dist,
                              const VelocityProfile& prof) {
  ValidationReport report;
  for (double b : prof.breakpoints()) {
    double l = prof.left_limit(b);
    double r = prof.right_limit(b);
    if (l < r) {
      report.ok = false;
      report.violations.push_back({b, l, r});
    }
  }
  // u- >= u >= u+ at the atoms. With the cadlag convention u(x) = u+(x),
  // so only left < right can fail there; report those too.
  for (const auto& at : dist.atoms()) {
    double l = prof.left_limit(at.position);
    double u = prof.eval(at.position);
    double r = prof.right_limit(at.position);
    if (l < u || u < r) {
      bool seen = false;
      for (const auto& viol : report.violations) {
        if (viol.position == at.position) seen = true;
      }
      if (!seen) {
        report.ok = false;
        report.violations.push_back({at.position, l, r});
      }
    }
  }
  return report;
}

namespace {

struct RawParticle {
  double a, m, v;
};

}  // namespace

ParticleSystem discretize(const MassDistribution& dist,
                          const VelocityProfile& prof, std::size_t n,
                          Interval window) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (window.lo < dist.window().lo - kCoverTol ||
      window.hi > dist.window().hi + kCoverTol) {
    throw std::invalid_argument("window exceeds the distribution window");
  }
  if (!validate_njc(dist, prof).ok) {
    throw std::invalid_argument("initial data violates the NJC");
  }
  double total = dist.mass(window.lo, window.hi);
  if (total <= 0.0) {
    throw std::invalid_argument("zero total mass in window");
  }

  // Restrict to the window.
  std::vector<DensityPiece> pieces;
  for (const auto& p : dist.pieces()) {
    double lo = std::max(p.interval.lo, window.lo);
    double hi = std::min(p.interval.hi, window.hi);
    if (hi > lo) pieces.push_back({{lo, hi}, p.density});
  }
  std::vector<Atom> small_atoms;
  std::vector<Atom> big_atoms;
  double chunk0 = total / static_cast<double>(n);
  for (const auto& at : dist.atoms()) {
    if (at.position < window.lo || at.position > window.hi) continue;
    if (at.mass > chunk0) {
      big_atoms.push_back(at);
    } else {
      small_atoms.push_back(at);
    }
  }

  std::vector<RawParticle> raw;
  raw.reserve(n + big_atoms.size());
  for (const auto& at : big_atoms) {
    raw.push_back({at.position, at.mass, prof.eval(at.position)});
  }
  double big_mass = 0.0;
  for (const auto& at : big_atoms) big_mass += at.mass;
  std::size_t n_rest = n - big_atoms.size();
  double rest_mass = total - big_mass;
  if (n_rest > 0 && rest_mass > kCoverTol * total) {
    MassDistribution rest(pieces, small_atoms, window);
    double chunk = rest_mass / static_cast<double>(n_rest);
    for (std::size_t k = 0; k < n_rest; ++k) {
      double q = (static_cast<double>(k) + 0.5) * chunk;
      double x = rest.quantile(q);
      raw.push_back({x, chunk, prof.eval(x)});
    }
  }
  std::sort(raw.begin(), raw.end(),
            [](const RawParticle& x, const RawParticle& y) { return x.a < y.a; });

  // Merge coincident same-velocity particles; split particles that sit on a
  // velocity jump into a left/right limit pair.
  double eps_split = 1e-12 * std::max(window.width(), 1.0);
  std::vector<RawParticle> merged;
  for (const auto& p : raw) {
    if (!merged.empty() && p.a == merged.back().a) {
      RawParticle& q = merged.back();
      q.v = (q.m * q.v + p.m * p.v) / (q.m + p.m);
      q.m += p.m;
    } else {
      merged.push_back(p);
    }
  }
  ParticleSystem sys;
  for (const auto& p : merged) {
    double l = prof.left_limit(p.a);
    double r = prof.right_limit(p.a);
    if (l != r) {
      sys.a.push_back(p.a - eps_split);
      sys.m.push_back(0.5 * p.m);
      sys.v.push_back(l);
      sys.a.push_back(p.a + eps_split);
      sys.m.push_back(0.5 * p.m);
      sys.v.push_back(r);
    } else {
      sys.a.push_back(p.a);
      sys.m.push_back(p.m);
      sys.v.push_back(p.v);
    }
  }
  for (std::size_t i = 1; i < sys.a.size(); ++i) {
    if (!(sys.a[i - 1] < sys.a[i])) {
      throw std::logic_error("discretization produced non-increasing positions");
    }
  }
  sys.dist = std::make_shared<MassDistribution>(dist);
  sys.prof = std::make_shared<VelocityProfile>(prof);
  sys.window = window;
  double got = sys.total_mass();
  if (std::abs(got - total) > 1e-12 * std::max(1.0, total)) {
    throw std::logic_error("discretization lost mass");
  }
  return sys;
}

ParticleSystem discretize(const MassDistribution& dist,
                          const VelocityProfile& prof, std::size_t n) {
  return discretize(dist, prof, n, dist.window());
}

MassDistribution stieltjes_distribution_from(const VelocityProfile& prof) {
  if (!prof.is_piecewise()) {
    throw std::invalid_argument(
        "Stieltjes distribution requires a piecewise profile");
  }
  if (!prof.non_increasing()) {
    throw std::invalid_argument("profile must be non-increasing");
  }
  const auto& bps = prof.breakpoints();
  std::vector<DensityPiece> pieces;
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    double slope = prof.segments()[i + 1].slope;
    if (slope < 0.0) {
      pieces.push_back({{bps[i], bps[i + 1]}, -slope});
    }
  }
  for (double b : bps) {
    double h = prof.jump_height(b);
    if (h > 0.0) atoms.push_back({b, h});
  }
  if (pieces.empty() && atoms.empty()) {
    throw std::invalid_argument("profile carries no Stieltjes mass");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) {
    lo = std::min(lo, p.interval.lo);
    hi = std::max(hi, p.interval.hi);
  }
  for (const auto& at : atoms) {
    lo = std::min(lo, at.position);
    hi = std::max(hi, at.position);
  }
  return MassDistribution(std::move(pieces), std::move(atoms), {lo, hi});
}

}  // namespace adhesion
