#include "adhesion/turbulence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adhesion {

const char* to_string(IntervalKind k) {
  switch (k) {
    case IntervalKind::BornCluster: return "born-cluster";
    case IntervalKind::Aggregation: return "aggregation";
    case IntervalKind::Point: return "point";
  }
  return "?";
}

const char* to_string(EntrySide s) {
  return s == EntrySide::Left ? "left" : "right";
}

std::vector<double> first_shock_times(const ParticleSystem& sys,
                                      double horizon) {
  std::vector<ShockRecord> records = first_shock_records(sys, horizon);
  std::vector<double> tau(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) tau[i] = records[i].tau;
  return tau;
}

TurbulenceReport turbulent_intervals(const ParticleSystem& sys,
                                     double horizon) {
  TurbulenceReport report;
  report.horizon = horizon;
  report.shocks = first_shock_records(sys, horizon);
  const std::size_t n = sys.size();
  report.interval_of.resize(n);
  double pos_tol = position_tolerance(sys);

  auto same_event = [&](const ShockRecord& a, const ShockRecord& b) {
    if (a.tau == kInfTime || b.tau == kInfTime) return false;
    double time_tol = 1e-9 * std::max(1.0, std::max(a.tau, b.tau));
    return std::abs(a.tau - b.tau) <= time_tol &&
           std::abs(a.position - b.position) <= pos_tol;
  };

  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && same_event(report.shocks[j], report.shocks[j + 1])) {
      ++j;
    }
    TurbulentInterval iv;
    iv.id = report.intervals.size();
    iv.first = i;
    iv.last = j;
    iv.A = sys.a[i];
    iv.B = sys.a[j];
    iv.tau = report.shocks[i].tau;
    if (iv.tau == kInfTime) {
      iv.birth_x = sys.a[i];  // never enters a shock
      iv.kind = IntervalKind::Point;
      iv.cluster_first = i;
      iv.cluster_last = j;
    } else {
      iv.birth_x = report.shocks[i].position;
      ClusterState birth = cluster_at(sys, iv.tau);
      const Block& b = birth.block_of_particle(i);
      iv.cluster_first = b.first;
      iv.cluster_last = b.last;
      if (b.first == iv.first && b.last == iv.last) {
        iv.kind = (i == j) ? IntervalKind::Point : IntervalKind::BornCluster;
      } else {
        iv.kind = IntervalKind::Aggregation;
      }
    }
    for (std::size_t k = i; k <= j; ++k) report.interval_of[k] = iv.id;
    report.intervals.push_back(iv);
    i = j + 1;
  }
  return report;
}

EntrySide classify_entry_side(double z1_0, double z2_0, double z3_0,
                              double z4_0, double x0, double tol) {
  bool left_match = std::abs(z1_0 - z3_0) <= tol;
  bool right_match = std::abs(z2_0 - z4_0) <= tol;
  bool at_right_end = std::abs(x0 - z2_0) <= tol;
  bool left = left_match && ((right_match && !at_right_end) || !right_match);
  return left ? EntrySide::Left : EntrySide::Right;
}

namespace {

std::size_t particle_index_of(const ParticleSystem& sys, double x0) {
  if (x0 < sys.window.lo || x0 > sys.window.hi) {
    throw WindowError("sample point outside the discretized window");
  }
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

}  // namespace

ProcessBundle build_bundle(const ParticleSystem& sys,
                           const TurbulenceReport& report, double x0,
                           const std::vector<double>& grid,
                           const std::vector<ClusterState>& states) {
  if (states.size() != grid.size()) {
    throw std::invalid_argument("one cluster state per grid time required");
  }
  ProcessBundle pb;
  pb.particle = particle_index_of(sys, x0);
  pb.x0 = sys.a[pb.particle];
  pb.gamma = report.tau(pb.particle);
  const TurbulentInterval& iv = report.intervals[report.interval_of[pb.particle]];
  pb.kA = iv.first;
  pb.kB = iv.last;
  pb.k3 = iv.cluster_first;
  pb.k4 = iv.cluster_last;
  pb.side = classify_entry_side(sys.a[pb.kA], sys.a[pb.kB], sys.a[pb.k3],
                                sys.a[pb.k4], pb.x0, position_tolerance(sys));
  pb.grid = grid;
  auto track = [&](std::size_t k, std::vector<double>& out) {
    out.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out[g] = states[g].block_of_particle(k).x;
    }
  };
  track(pb.particle, pb.X);
  track(pb.kA, pb.Z1);
  track(pb.kB, pb.Z2);
  track(pb.k3, pb.Z3);
  track(pb.k4, pb.Z4);
  pb.Y = (pb.side == EntrySide::Left) ? pb.Z3 : pb.Z4;
  return pb;
}

ProcessBundle build_bundle(const ParticleSystem& sys,
                           const TurbulenceReport& report, double x0,
                           const std::vector<double>& grid) {
  std::vector<ClusterState> states;
  states.reserve(grid.size());
  for (double t : grid) states.push_back(cluster_at(sys, t));
  return build_bundle(sys, report, x0, grid, states);
}

std::pair<double, double> f_g_values(const ParticleSystem& sys, double a,
                                     double t, double r) {
  if (t < 0.0 || r < 0.0) {
    throw std::invalid_argument("times must be non-negative");
  }
  if (t >= r) {
    double x = flow_map(sys, 0.0, t, a);
    return {x, x};
  }
  double x = flow_map(sys, 0.0, r, a);
  VelocityValue u = velocity_field(sys, r, x);
  return {x - (r - t) * u.u_minus, x - (r - t) * u.u_plus};
}

std::vector<Polyline> delta_shock_geometry(const ParticleSystem& sys,
                                           const TurbulenceReport& report,
                                           std::size_t interval_id,
                                           const std::vector<double>& grid) {
  if (interval_id >= report.intervals.size()) {
    throw std::invalid_argument("unknown turbulent interval id");
  }
  const TurbulentInterval& iv = report.intervals[interval_id];
  double r = iv.tau;

  std::vector<double> pre, post;
  for (double t : grid) {
    if (t < 0.0) throw std::invalid_argument("grid times must be non-negative");
    (t < r ? pre : post).push_back(t);
  }
  std::vector<ClusterState> pre_states;
  pre_states.reserve(pre.size());
  for (double t : pre) pre_states.push_back(cluster_at(sys, t));

  std::vector<Polyline> out;
  const std::size_t anchors[4] = {iv.first, iv.last, iv.cluster_first,
                                  iv.cluster_last};
  const char* labels[4] = {"Z1", "Z2", "Z3", "Z4"};
  for (int p = 0; p < 4; ++p) {
    Polyline line;
    line.label = labels[p];
    for (std::size_t g = 0; g < pre.size(); ++g) {
      line.points.emplace_back(pre[g],
                               pre_states[g].block_of_particle(anchors[p]).x);
    }
    if (r != kInfTime) line.points.emplace_back(r, iv.birth_x);
    out.push_back(std::move(line));
  }
  if (r != kInfTime) {
    Polyline shock;
    shock.label = "shock";
    shock.points.emplace_back(r, iv.birth_x);
    for (double t : post) {
      ClusterState st = cluster_at(sys, t);
      shock.points.emplace_back(t, st.block_of_particle(iv.first).x);
    }
    out.push_back(std::move(shock));
  }
  return out;
}

}  // namespace adhesion
