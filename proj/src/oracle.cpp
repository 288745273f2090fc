#include "adhesion/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace adhesion {

EventEngine::EventEngine(const ParticleSystem& sys) : sys_(&sys) {
  const std::size_t n = sys.size();
  blocks_.reserve(n);
  shocks_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    BlockState b;
    b.first = b.last = i;
    b.sum_ma = sys.m[i] * sys.a[i];
    b.sum_mv = sys.m[i] * sys.v[i];
    b.mass = sys.m[i];
    b.left = static_cast<long>(i) - 1;
    b.right = (i + 1 < n) ? static_cast<long>(i) + 1 : -1;
    b.version = 0;
    b.alive = true;
    blocks_.push_back(b);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    push_collision(static_cast<long>(i), static_cast<long>(i) + 1);
  }
}

void EventEngine::push_collision(long bi, long ci) {
  const BlockState& b = blocks_[bi];
  const BlockState& c = blocks_[ci];
  double wb = b.vel(), wc = c.vel();
  if (!(wb > wc)) return;  // separating or parallel
  double xb0 = b.sum_ma / b.mass, xc0 = c.sum_ma / c.mass;
  double tc = (xc0 - xb0) / (wb - wc);
  if (tc < now_) tc = now_;  // already touching up to rounding
  heap_.push_back({tc, bi, ci, b.version, c.version});
  std::push_heap(heap_.begin(), heap_.end(), std::greater<Event>{});
}

void EventEngine::advance_to(double t) {
  double slack = 1e-12 * std::max(1.0, t);
  while (!heap_.empty() && heap_.front().time <= t + slack) {
    Event e = heap_.front();
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<Event>{});
    heap_.pop_back();
    BlockState& b = blocks_[e.left_id];
    BlockState& c = blocks_[e.right_id];
    if (!b.alive || !c.alive) continue;
    if (b.version != e.left_ver || c.version != e.right_ver) continue;
    if (b.right != e.right_id) continue;

    double tc = std::max(e.time, now_);
    now_ = tc;
    // Inelastic merge: mass and momentum add, the left block absorbs.
    b.sum_ma += c.sum_ma;
    b.sum_mv += c.sum_mv;
    b.mass += c.mass;
    double x = b.pos(tc);
    if (shocks_[b.first].tau == kInfTime) {
      // b was (and still records as) a single unshocked particle
      for (std::size_t i = b.first; i <= b.last; ++i) {
        shocks_[i] = {tc, x};
      }
    }
    if (shocks_[c.first].tau == kInfTime) {
      for (std::size_t i = c.first; i <= c.last; ++i) {
        shocks_[i] = {tc, x};
      }
    }
    b.last = c.last;
    b.right = c.right;
    if (c.right >= 0) blocks_[c.right].left = e.left_id;
    c.alive = false;
    b.version++;
    if (b.left >= 0) push_collision(b.left, e.left_id);
    if (b.right >= 0) push_collision(e.left_id, b.right);
  }
  now_ = std::max(now_, t);
}

ClusterState EventEngine::state_at_current(double t) const {
  ClusterState state;
  state.t = t;
  state.block_of.resize(sys_->size());
  long id = -1;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].alive && blocks_[i].first == 0) {
      id = static_cast<long>(i);
      break;
    }
  }
  // Blocks are chained left-to-right starting from the one holding index 0.
  while (id >= 0) {
    const BlockState& b = blocks_[id];
    Block out;
    out.first = b.first;
    out.last = b.last;
    out.mass = b.mass;
    out.w = b.vel();
    out.x = b.pos(t);
    out.alpha = sys_->a[b.first];
    out.beta = sys_->a[b.last];
    for (std::size_t i = b.first; i <= b.last; ++i) {
      state.block_of[i] = state.blocks.size();
    }
    state.blocks.push_back(out);
    id = b.right;
  }
  return state;
}

ClusterState event_driven_oracle(const ParticleSystem& sys, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be non-negative");
  EventEngine engine(sys);
  engine.advance_to(t);
  return engine.state_at_current(t);
}

std::vector<ShockRecord> first_shock_records(const ParticleSystem& sys,
                                             double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  EventEngine engine(sys);
  engine.advance_to(horizon);
  return engine.shocks();
}

}  // namespace adhesion
