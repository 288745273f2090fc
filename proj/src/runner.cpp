#include "adhesion/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"

#include "adhesion/flow.hpp"
#include "adhesion/turbulence.hpp"
#include "adhesion/verify.hpp"

namespace adhesion {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, threads);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string number_or_inf(double v) {
  return v == kInfTime ? std::string("inf") : format_double(v);
}

json json_number_or_inf(double v) {
  if (v == kInfTime) return json("inf");
  return json(v);
}

class OutputWriter {
 public:
  explicit OutputWriter(const std::string& dir) : dir_(dir) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name);
    out << content;
    files_.emplace_back(name, hex64(fnv1a64(content)));
  }

  void write_manifest(const std::string& scenario_text) {
    json manifest;
    manifest["scenario_hash"] = hex64(fnv1a64(scenario_text));
    manifest["tool_version"] = kToolVersion;
    json files = json::array();
    for (const auto& [name, digest] : files_) {
      files.push_back({{"path", name}, {"digest", digest}});
    }
    manifest["files"] = files;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string state_csv(const ClusterState& state) {
  std::string s = "block_id,x,mass,velocity,alpha,beta,first_index,last_index\n";
  for (std::size_t k = 0; k < state.blocks.size(); ++k) {
    const Block& b = state.blocks[k];
    s += std::to_string(k) + "," + format_double(b.x) + "," +
         format_double(b.mass) + "," + format_double(b.w) + "," +
         format_double(b.alpha) + "," + format_double(b.beta) + "," +
         std::to_string(b.first) + "," + std::to_string(b.last) + "\n";
  }
  return s;
}

std::string bundle_csv(const ProcessBundle& pb) {
  std::string s = "t,X,Z1,Z2,Z3,Z4,Y,gamma,entry_side\n";
  for (std::size_t g = 0; g < pb.grid.size(); ++g) {
    s += format_double(pb.grid[g]) + "," + format_double(pb.X[g]) + "," +
         format_double(pb.Z1[g]) + "," + format_double(pb.Z2[g]) + "," +
         format_double(pb.Z3[g]) + "," + format_double(pb.Z4[g]) + "," +
         format_double(pb.Y[g]) + "," + number_or_inf(pb.gamma) + "," +
         to_string(pb.side) + "\n";
  }
  return s;
}

json turbulence_json(const TurbulenceReport& report) {
  json out;
  out["horizon"] = report.horizon;
  json tau = json::array();
  for (const ShockRecord& r : report.shocks) {
    tau.push_back(json_number_or_inf(r.tau));
  }
  out["tau"] = tau;
  json intervals = json::array();
  for (const TurbulentInterval& iv : report.intervals) {
    intervals.push_back({{"id", iv.id},
                         {"first", iv.first},
                         {"last", iv.last},
                         {"A", iv.A},
                         {"B", iv.B},
                         {"tau", json_number_or_inf(iv.tau)},
                         {"birth_x", iv.birth_x},
                         {"kind", to_string(iv.kind)},
                         {"cluster_first", iv.cluster_first},
                         {"cluster_last", iv.cluster_last}});
  }
  out["intervals"] = intervals;
  return out;
}

json report_json(const CheckReport& r) {
  return {{"name", r.name},
          {"residual", r.residual},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"diagnostics", r.diagnostics}};
}

ConvexTestFunction parse_psi(const std::string& spec) {
  if (spec == "square") return ConvexTestFunction::square();
  if (spec == "abs") return ConvexTestFunction::absolute();
  if (spec.rfind("exp:", 0) == 0) {
    return ConvexTestFunction::exp_scaled(std::stod(spec.substr(4)));
  }
  if (spec.rfind("hinge:", 0) == 0) {
    return ConvexTestFunction::hinge(std::stod(spec.substr(6)));
  }
  throw ScenarioError("unknown test function '" + spec +
                      "' (square, abs, exp:<k>, hinge:<c>)");
}

std::string out_dir_for(const Scenario& sc, const RunOptions& opt) {
  return opt.out_dir.empty() ? sc.out_dir : opt.out_dir;
}

/// Compares velocity_field with the entropy-solution oracle at random
/// points kept away from nondegenerate block positions.
CheckReport lax_oleinik_check(const ParticleSystem& sys, double t,
                              std::size_t samples) {
  ClusterState state = cluster_at(sys, t);
  double margin = 10.0 * sys.window.width() / static_cast<double>(sys.size());
  double lo = state.blocks.front().x, hi = state.blocks.back().x;
  SplitMix64 rng(0x1a01ea6u);
  double residual = 0.0;
  double worst_x = lo;
  std::size_t grid_points = 16 * sys.size();
  std::size_t accepted = 0, tries = 0;
  while (accepted < samples && tries < 100 * samples) {
    ++tries;
    double x = lo + (hi - lo) * rng.next_unit();
    std::size_t k = state.nearest_block(x);
    if (state.blocks[k].size() > 1 &&
        std::abs(state.blocks[k].x - x) < margin) {
      continue;  // too close to a shock: u_t may be discontinuous here
    }
    ++accepted;
    double u = velocity_field(sys, state, x).u;
    double oracle = lax_oleinik_oracle(*sys.prof, sys.window, x, t,
                                       grid_points);
    double dev = std::abs(u - oracle);
    if (dev > residual) {
      residual = dev;
      worst_x = x;
    }
  }
  CheckReport r;
  r.name = "lax_oleinik(t=" + format_double(t) + ")";
  r.residual = residual;
  r.tolerance = std::max(1e-6, 10.0 / static_cast<double>(sys.size()));
  r.pass = residual <= r.tolerance && accepted == samples;
  r.diagnostics = std::to_string(accepted) + " continuity points, worst x=" +
                  format_double(worst_x);
  return r;
}

}  // namespace

int run_simulate(const Scenario& sc, const RunOptions& opt) {
  OutputWriter out(out_dir_for(sc, opt));
  if (sc.grid.empty()) {
    out.write_manifest(opt.scenario_text);
    return kExitOk;
  }
  ParticleSystem sys = build_system(sc);
  TurbulenceReport report = turbulent_intervals(sys, sc.horizon);

  std::vector<ClusterState> states(sc.grid.size());
  parallel_for(sc.grid.size(), opt.threads,
               [&](std::size_t g) { states[g] = cluster_at(sys, sc.grid[g]); });

  std::vector<std::string> state_files(sc.grid.size());
  parallel_for(sc.grid.size(), opt.threads,
               [&](std::size_t g) { state_files[g] = state_csv(states[g]); });
  for (std::size_t g = 0; g < sc.grid.size(); ++g) {
    char name[32];
    std::snprintf(name, sizeof(name), "state_%03zu.csv", g);
    out.write(name, state_files[g]);
  }

  out.write("turbulence.json", turbulence_json(report).dump(2) + "\n");

  std::vector<double> samples = sample_points(sc, sys);
  std::set<std::size_t> sample_intervals;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    ProcessBundle pb = build_bundle(sys, report, samples[k], sc.grid, states);
    sample_intervals.insert(report.interval_of[pb.particle]);
    char name[32];
    std::snprintf(name, sizeof(name), "bundle_%03zu.csv", k);
    out.write(name, bundle_csv(pb));
  }

  json geometry = json::array();
  for (std::size_t id : sample_intervals) {
    json lines = json::array();
    for (const Polyline& line :
         delta_shock_geometry(sys, report, id, sc.grid)) {
      json pts = json::array();
      for (const auto& [t, x] : line.points) pts.push_back({t, x});
      lines.push_back({{"label", line.label}, {"points", pts}});
    }
    geometry.push_back({{"interval", id}, {"polylines", lines}});
  }
  out.write("geometry.json", geometry.dump(2) + "\n");

  out.write_manifest(opt.scenario_text);
  return kExitOk;
}

int run_verify(const Scenario& sc, const RunOptions& opt) {
  OutputWriter out(out_dir_for(sc, opt));
  std::vector<CheckReport> reports;
  if (sc.checks.any()) {
    ParticleSystem sys = build_system(sc);
    const ChecksConfig& c = sc.checks;
    if (c.velocity_conditional) {
      reports.push_back(check_velocity_conditional(sys, c.velocity_conditional_t));
    }
    if (c.martingale_x) {
      reports.push_back(check_martingale_X(sys, c.martingale_s, c.martingale_t,
                                           opt.velocity_bias));
    }
    if (!c.semimartingale.empty() || !c.martingale_iff.empty()) {
      TurbulenceReport turb = turbulent_intervals(sys, sc.horizon);
      std::vector<double> samples = sample_points(sc, sys);
      auto kind_of = [](const std::string& name) {
        if (name == "Z1") return ProcessKind::Z1;
        if (name == "Z2") return ProcessKind::Z2;
        if (name == "Z3") return ProcessKind::Z3;
        if (name == "Z4") return ProcessKind::Z4;
        return ProcessKind::Y;
      };
      for (const std::string& p : c.semimartingale) {
        reports.push_back(
            check_semimartingale_Z(sys, turb, kind_of(p), samples, sc.grid));
      }
      for (const std::string& p : c.martingale_iff) {
        reports.push_back(check_martingale_iff_degenerate(
            sys, turb, kind_of(p), sc.grid, c.iff_tolerance));
      }
    }
    for (const std::string& spec : c.dissipation) {
      ConvexTestFunction psi = parse_psi(spec);
      CheckReport rep;
      std::vector<double> profile = dissipation_profile(sys, psi, sc.grid, &rep);
      std::string csv = "t,value\n";
      for (std::size_t g = 0; g < sc.grid.size(); ++g) {
        csv += format_double(sc.grid[g]) + "," + format_double(profile[g]) + "\n";
      }
      out.write("dissipation_" + spec + ".csv", csv);
      reports.push_back(rep);
    }
    if (c.burgers) {
      reports.push_back(burgers_consistency(sys, c.burgers_t, c.burgers_constant));
    }
    if (c.stieltjes) {
      reports.push_back(stieltjes_case_consistency(
          *sc.velocity, sc.n, c.stieltjes_t, c.stieltjes_constant));
    }
    if (c.lax_oleinik) {
      reports.push_back(lax_oleinik_check(sys, c.lax_t, c.lax_samples));
    }
  }
  json bundle = json::array();
  bool all_pass = true;
  for (const CheckReport& r : reports) {
    bundle.push_back(report_json(r));
    all_pass = all_pass && r.pass;
  }
  out.write("reports.json", bundle.dump(2) + "\n");
  out.write_manifest(opt.scenario_text);
  return all_pass ? kExitOk : kExitCheckFailure;
}

int run_sweep(const Scenario& sc, const RunOptions& opt) {
  if (sc.sweep_ns.empty()) {
    throw ScenarioError("sweep requires run.sweep.ns");
  }
  OutputWriter out(out_dir_for(sc, opt));
  std::string csv = "n,max_interval_width,burgers_sup_distance,runtime_ms\n";
  double t_check = sc.checks.burgers ? sc.checks.burgers_t
                                     : (sc.grid.empty() ? 1.0 : sc.grid.back());
  for (std::size_t n : sc.sweep_ns) {
    auto begin = std::chrono::steady_clock::now();
    Scenario sized = sc;
    sized.n = n;
    ParticleSystem sys = build_system(sized);
    TurbulenceReport report = turbulent_intervals(sys, sc.horizon);
    double width = 0.0;
    for (const TurbulentInterval& iv : report.intervals) {
      width = std::max(width, iv.B - iv.A);
    }
    double burgers = 0.0;
    if (sys.lambda_provenance()) {
      burgers = burgers_consistency(sys, t_check).residual;
    }
    auto end = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(end - begin).count();
    csv += std::to_string(n) + "," + format_double(width) + "," +
           format_double(burgers) + "," + format_double(ms) + "\n";
  }
  out.write("sweep.csv", csv);
  return kExitOk;
}

}  // namespace adhesion
