#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adhesion/model.hpp"

namespace adhesion {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChecksConfig {
  bool velocity_conditional = false;
  double velocity_conditional_t = 1.0;

  bool martingale_x = false;
  double martingale_s = 0.4;
  double martingale_t = 1.0;

  std::vector<std::string> semimartingale;  // process names Z1..Z4, Y
  std::vector<std::string> martingale_iff;  // process names
  double iff_tolerance = 1e-12;

  std::vector<std::string> dissipation;  // square, abs, exp:<k>, hinge:<c>

  bool burgers = false;
  double burgers_t = 1.0;
  double burgers_constant = 8.0;

  bool stieltjes = false;
  double stieltjes_t = 1.0;
  double stieltjes_constant = 8.0;

  bool lax_oleinik = false;
  double lax_t = 1.0;
  std::size_t lax_samples = 1000;

  bool any() const;
};

struct Scenario {
  std::string name;
  // model
  std::size_t n = 0;
  Interval window;
  bool stieltjes_distribution = false;  // mu0 = -du0 instead of explicit
  std::vector<DensityPiece> pieces;     // empty + !stieltjes => uniform
  std::vector<Atom> atoms;
  std::shared_ptr<VelocityProfile> velocity;
  // run
  std::vector<double> grid;
  double horizon = 0.0;
  std::vector<double> sample_x0;   // explicit sample points
  std::size_t sample_count = 0;    // or drawn from mu0
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::size_t> sweep_ns;

  ChecksConfig checks;
  std::string out_dir;
};

/// Strict parse: unknown keys anywhere are rejected.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

std::string scenario_schema();

ParticleSystem build_system(const Scenario& sc);

/// Sample points: the explicit list, or inverse-CDF draws from mu0 snapped
/// to the nearest particle position.
std::vector<double> sample_points(const Scenario& sc,
                                  const ParticleSystem& sys);

}  // namespace adhesion
