#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "adhesion/runner.hpp"
#include "adhesion/scenario.hpp"

namespace {

struct CliArgs {
  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool has_seed = false;
  unsigned threads = 0;
  double velocity_bias = 0.0;
  bool enable_fault_injection = false;
};

unsigned resolve_threads(unsigned from_flag) {
  if (from_flag > 0) return from_flag;
  if (const char* env = std::getenv("ADHESION_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

int dispatch(const std::string& mode, const CliArgs& args) {
  adhesion::Scenario sc = adhesion::load_scenario(args.scenario_path);
  if (args.has_seed) {
    sc.seed = args.seed;
    sc.has_seed = true;
  }
  adhesion::RunOptions opt;
  opt.out_dir = args.out_dir;
  opt.threads = resolve_threads(args.threads);
  if (args.velocity_bias != 0.0) {
    if (!args.enable_fault_injection) {
      std::cerr << "--inject-velocity-bias requires --enable-fault-injection\n";
      return adhesion::kExitConfigError;
    }
    opt.velocity_bias = args.velocity_bias;
  }
  {
    std::ifstream in(args.scenario_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    opt.scenario_text = ss.str();
  }
  if (mode == "simulate") return adhesion::run_simulate(sc, opt);
  if (mode == "verify") return adhesion::run_verify(sc, opt);
  return adhesion::run_sweep(sc, opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-D sticky-particle simulator and structural-identity checker"};
  app.require_subcommand(1);

  CliArgs args;
  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    if (needs_scenario) {
      sub->add_option("--scenario", args.scenario_path, "Scenario JSON file")
          ->required();
      sub->add_option("--out", args.out_dir, "Output directory override");
      sub->add_option("--seed", args.seed, "Sampling seed override")
          ->each([&](const std::string&) { args.has_seed = true; });
      sub->add_option("--threads", args.threads,
                      "Worker threads (ADHESION_THREADS as fallback)");
      sub->add_option("--inject-velocity-bias", args.velocity_bias,
                      "Test-only block-velocity corruption");
      sub->add_flag("--enable-fault-injection", args.enable_fault_injection,
                    "Unlock --inject-velocity-bias");
    }
  };
  add_common(app.add_subcommand("simulate", "Emit cluster states, turbulence "
                                            "report, process bundles"),
             true);
  add_common(app.add_subcommand("verify", "Run the configured checks"), true);
  add_common(app.add_subcommand("sweep", "Convergence table over n"), true);
  app.add_subcommand("schema", "Print the scenario config schema");

  CLI11_PARSE(app, argc, argv);

  const std::string mode = app.get_subcommands().front()->get_name();
  if (mode == "schema") {
    std::cout << adhesion::scenario_schema();
    return adhesion::kExitOk;
  }
  try {
    return dispatch(mode, args);
  } catch (const adhesion::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return adhesion::kExitConfigError;
  } catch (const adhesion::WindowError& e) {
    std::cerr << "window error: " << e.what() << "\n";
    return adhesion::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return adhesion::kExitConfigError;
  } catch (const std::logic_error& e) {
    std::cerr << "internal invariant breach: " << e.what() << "\n";
    return adhesion::kExitInternalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return adhesion::kExitInternalError;
  }
}
