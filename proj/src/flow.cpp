#include "adhesion/flow.hpp"

#include <algorithm>
#include <cmath>

namespace adhesion {

namespace {

double tie_tolerance(const ParticleSystem& sys) {
  return 1e-12 * std::max(1.0, sys.window.width());
}

}  // namespace

double position_tolerance(const ParticleSystem& sys) {
  double scale = std::max({1.0, std::abs(sys.window.lo), std::abs(sys.window.hi)});
  return 1e-9 * scale;
}

std::size_t ClusterState::nearest_block(double x) const {
  auto it = std::lower_bound(
      blocks.begin(), blocks.end(), x,
      [](const Block& b, double value) { return b.x < value; });
  if (it == blocks.begin()) return 0;
  if (it == blocks.end()) return blocks.size() - 1;
  std::size_t hi = static_cast<std::size_t>(it - blocks.begin());
  std::size_t lo = hi - 1;
  return (x - blocks[lo].x <= blocks[hi].x - x) ? lo : hi;
}

std::size_t ClusterState::find_block_at(double x, double tol) const {
  std::size_t k = nearest_block(x);
  return (std::abs(blocks[k].x - x) <= tol) ? k : npos;
}

ClusterState cluster_at(const ParticleSystem& sys, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be non-negative");
  const std::size_t n = sys.size();
  if (n == 0) throw std::invalid_argument("empty particle system");
  double tie = tie_tolerance(sys);

  // Weighted PAVA on free-flight positions.
  struct Pool {
    std::size_t first;
    double sum_mp;  // sum of m * (a + t v)
    double sum_m;
  };
  std::vector<Pool> stack;
  stack.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = sys.a[i] + t * sys.v[i];
    Pool cur{i, sys.m[i] * p, sys.m[i]};
    while (!stack.empty() &&
           stack.back().sum_mp / stack.back().sum_m >=
               cur.sum_mp / cur.sum_m - tie) {
      cur.first = stack.back().first;
      cur.sum_mp += stack.back().sum_mp;
      cur.sum_m += stack.back().sum_m;
      stack.pop_back();
    }
    stack.push_back(cur);
  }

  ClusterState state;
  state.t = t;
  state.blocks.reserve(stack.size());
  state.block_of.resize(n);
  std::size_t next_first = n;
  for (std::size_t k = stack.size(); k-- > 0;) {
    Block b;
    b.first = stack[k].first;
    b.last = next_first - 1;
    next_first = b.first;
    state.blocks.push_back(b);
  }
  std::reverse(state.blocks.begin(), state.blocks.end());
  for (std::size_t k = 0; k < state.blocks.size(); ++k) {
    Block& b = state.blocks[k];
    double mass = 0.0, mom = 0.0, mp = 0.0;
    for (std::size_t i = b.first; i <= b.last; ++i) {
      mass += sys.m[i];
      mom += sys.m[i] * sys.v[i];
      mp += sys.m[i] * (sys.a[i] + t * sys.v[i]);
      state.block_of[i] = k;
    }
    b.mass = mass;
    b.w = mom / mass;
    b.x = mp / mass;
    b.alpha = sys.a[b.first];
    b.beta = sys.a[b.last];
  }
  return state;
}

double position_of_initial(const ParticleSystem& sys, const ClusterState& state,
                           double a0) {
  double t = state.t;
  if (a0 <= sys.a.front()) {
    double free = a0 + t * sys.v.front();
    return std::min(free, state.blocks.front().x);
  }
  if (a0 >= sys.a.back()) {
    double free = a0 + t * sys.v.back();
    return std::max(free, state.blocks.back().x);
  }
  auto it = std::upper_bound(sys.a.begin(), sys.a.end(), a0);
  std::size_t j = static_cast<std::size_t>(it - sys.a.begin());  // a[j-1] <= a0 < a[j]
  std::size_t i = j - 1;
  if (sys.a[i] == a0) return state.block_of_particle(i).x;
  std::size_t bi = state.block_of[i];
  std::size_t bj = state.block_of[j];
  if (bi == bj) return state.blocks[bi].x;
  double theta = (a0 - sys.a[i]) / (sys.a[j] - sys.a[i]);
  return (1.0 - theta) * state.blocks[bi].x + theta * state.blocks[bj].x;
}

namespace {

// Inverts the position map at the time of `state`: returns an initial
// coordinate a* with position_of_initial(a*) == y. For y at a block position
// the representative is the block's first particle.
struct InverseResult {
  double a0 = 0.0;
  std::size_t block = ClusterState::npos;  // set when y is a block position
  bool outside = false;                    // beyond the end particles
};

InverseResult invert_position(const ParticleSystem& sys,
                              const ClusterState& state, double y, double tol) {
  InverseResult r;
  std::size_t k = state.find_block_at(y, tol);
  if (k != ClusterState::npos) {
    r.block = k;
    r.a0 = sys.a[state.blocks[k].first];
    return r;
  }
  double t = state.t;
  if (y < state.blocks.front().x) {
    r.a0 = y - t * sys.v.front();
    r.outside = true;
    return r;
  }
  if (y > state.blocks.back().x) {
    r.a0 = y - t * sys.v.back();
    r.outside = true;
    return r;
  }
  auto it = std::lower_bound(
      state.blocks.begin(), state.blocks.end(), y,
      [](const Block& b, double value) { return b.x < value; });
  std::size_t hi = static_cast<std::size_t>(it - state.blocks.begin());
  std::size_t lo = hi - 1;
  const Block& bl = state.blocks[lo];
  const Block& bh = state.blocks[hi];
  double theta = (y - bl.x) / (bh.x - bl.x);
  r.a0 = sys.a[bl.last] + theta * (sys.a[bh.first] - sys.a[bl.last]);
  return r;
}

}  // namespace

double flow_map(const ParticleSystem& sys, const ClusterState& at_s,
                const ClusterState& at_st, double y) {
  double tol = position_tolerance(sys);
  InverseResult inv = invert_position(sys, at_s, y, tol);
  if (inv.block != ClusterState::npos) {
    std::size_t first = at_s.blocks[inv.block].first;
    return at_st.block_of_particle(first).x;
  }
  if (inv.outside || inv.a0 < sys.a.front() || inv.a0 > sys.a.back()) {
    throw WindowError("flow query outside the safe window");
  }
  return position_of_initial(sys, at_st, inv.a0);
}

double flow_map(const ParticleSystem& sys, double s, double t, double y) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("times must be non-negative");
  ClusterState at_s = cluster_at(sys, s);
  ClusterState at_st = cluster_at(sys, s + t);
  return flow_map(sys, at_s, at_st, y);
}

std::pair<double, double> cluster_bounds(const ParticleSystem& sys,
                                         const ClusterState& state, double x) {
  double tol = position_tolerance(sys);
  std::size_t k = state.find_block_at(x, tol);
  if (k != ClusterState::npos) {
    return {state.blocks[k].alpha, state.blocks[k].beta};
  }
  InverseResult inv = invert_position(sys, state, x, tol);
  return {inv.a0, inv.a0};
}

std::pair<double, double> cluster_bounds(const ParticleSystem& sys, double t,
                                         double x) {
  ClusterState state = cluster_at(sys, t);
  return cluster_bounds(sys, state, x);
}

VelocityValue velocity_field(const ParticleSystem& sys,
                             const ClusterState& state, double x) {
  double tol = position_tolerance(sys);
  std::size_t k = state.find_block_at(x, tol);
  if (k != ClusterState::npos) {
    const Block& b = state.blocks[k];
    return {b.w, sys.v[b.first], sys.v[b.last]};
  }
  if (x < state.blocks.front().x) {
    double u = sys.v.front();
    return {u, u, u};
  }
  if (x > state.blocks.back().x) {
    double u = sys.v.back();
    return {u, u, u};
  }
  auto it = std::lower_bound(
      state.blocks.begin(), state.blocks.end(), x,
      [](const Block& b, double value) { return b.x < value; });
  std::size_t hi = static_cast<std::size_t>(it - state.blocks.begin());
  std::size_t lo = hi - 1;
  double theta = (x - state.blocks[lo].x) / (state.blocks[hi].x - state.blocks[lo].x);
  double u = (1.0 - theta) * state.blocks[lo].w + theta * state.blocks[hi].w;
  return {u, u, u};
}

VelocityValue velocity_field(const ParticleSystem& sys, double t, double x) {
  ClusterState state = cluster_at(sys, t);
  return velocity_field(sys, state, x);
}

SafeWindow safe_window(const ParticleSystem& sys, Interval query, double T) {
  if (T < 0.0) throw std::invalid_argument("horizon must be non-negative");
  if (query.lo < sys.window.lo || query.hi > sys.window.hi) {
    throw WindowError("query outside the discretized window");
  }
  SafeWindow sw;
  sw.query = query;
  sw.horizon = T;
  if (T == 0.0) {
    sw.enlarged = query;
    return sw;
  }
  ClusterState at0 = cluster_at(sys, 0.0);
  ClusterState atT = cluster_at(sys, T);
  double xa = flow_map(sys, at0, atT, query.lo);
  double xb = flow_map(sys, at0, atT, query.hi);
  auto ba = cluster_bounds(sys, atT, xa);
  auto bb = cluster_bounds(sys, atT, xb);
  sw.enlarged = {std::min(ba.first, query.lo), std::max(bb.second, query.hi)};
  return sw;
}

}  // namespace adhesion
