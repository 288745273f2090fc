#pragma once

#include "adhesion/flow.hpp"
#include "adhesion/model.hpp"

namespace adhesion {

struct ShockRecord {
  double tau = kInfTime;      // first merge time, +inf if none before horizon
  double position = 0.0;      // block position at the merge
};

/// Free flight plus chronological pairwise inelastic merges. Block
/// trajectories are kept in closed form (sum of m*a, sum of m*v, mass), so
/// collision times are exact up to rounding and no drift accumulates.
class EventEngine {
 public:
  explicit EventEngine(const ParticleSystem& sys);

  /// Processes every merge with time <= t (grazing contact at exactly t
  /// included, matching the cluster tie rule).
  void advance_to(double t);

  ClusterState state_at_current(double t) const;
  const std::vector<ShockRecord>& shocks() const { return shocks_; }
  double processed_until() const { return now_; }

 private:
  struct BlockState {
    std::size_t first, last;
    double sum_ma, sum_mv, mass;
    long left, right;  // neighbor block ids, -1 at the ends
    std::uint32_t version;
    bool alive;
    double pos(double t) const { return (sum_ma + t * sum_mv) / mass; }
    double vel() const { return sum_mv / mass; }
  };
  struct Event {
    double time;
    long left_id, right_id;
    std::uint32_t left_ver, right_ver;
    bool operator>(const Event& o) const { return time > o.time; }
  };

  void push_collision(long b, long c);

  const ParticleSystem* sys_;
  std::vector<BlockState> blocks_;
  std::vector<Event> heap_;
  std::vector<ShockRecord> shocks_;
  double now_ = 0.0;
};

/// Brute-force reference for cluster_at; intended for small n.
ClusterState event_driven_oracle(const ParticleSystem& sys, double t);

/// First merge time and merge position per particle, from exact event times.
std::vector<ShockRecord> first_shock_records(const ParticleSystem& sys,
                                             double horizon);

}  // namespace adhesion
