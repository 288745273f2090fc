#include "adhesion/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace adhesion {

using nlohmann::json;

bool ChecksConfig::any() const {
  return velocity_conditional || martingale_x || !semimartingale.empty() ||
         !martingale_iff.empty() || !dissipation.empty() || burgers ||
         stieltjes || lax_oleinik;
}

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      throw ScenarioError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

Interval parse_interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw ScenarioError(where + " must be a [lo, hi] pair");
  }
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.hi > iv.lo)) throw ScenarioError(where + " must satisfy lo < hi");
  return iv;
}

std::shared_ptr<VelocityProfile> parse_velocity(const json& j) {
  if (!j.is_object()) throw ScenarioError("model.velocity must be an object");
  std::string kind = j.value("kind", "");
  if (kind == "constant") {
    require_keys(j, "model.velocity", {"kind", "value"});
    return std::make_shared<VelocityProfile>(
        VelocityProfile::constant(j.at("value").get<double>()));
  }
  if (kind == "neg_arctan") {
    require_keys(j, "model.velocity", {"kind", "scale"});
    return std::make_shared<VelocityProfile>(
        VelocityProfile::neg_arctan(j.at("scale").get<double>()));
  }
  if (kind == "piecewise") {
    require_keys(j, "model.velocity", {"kind", "breakpoints", "segments"});
    std::vector<double> bps = j.at("breakpoints").get<std::vector<double>>();
    std::vector<AffineSegment> segs;
    for (const json& s : j.at("segments")) {
      require_keys(s, "model.velocity.segments[]", {"slope", "intercept"});
      segs.push_back({s.at("slope").get<double>(),
                      s.at("intercept").get<double>()});
    }
    return std::make_shared<VelocityProfile>(std::move(bps), std::move(segs));
  }
  throw ScenarioError("model.velocity.kind must be constant, neg_arctan or "
                      "piecewise");
}

std::vector<double> parse_grid(const json& j) {
  require_keys(j, "run.grid", {"times", "start", "stop", "count"});
  if (j.contains("times")) {
    if (j.contains("start") || j.contains("stop") || j.contains("count")) {
      throw ScenarioError("run.grid: give either times or start/stop/count");
    }
    auto times = j.at("times").get<std::vector<double>>();
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < 0.0 || (k > 0 && !(times[k - 1] < times[k]))) {
        throw ScenarioError(
            "run.grid.times must be non-negative and strictly increasing");
      }
    }
    return times;
  }
  double start = j.at("start").get<double>();
  double stop = j.at("stop").get<double>();
  std::size_t count = j.at("count").get<std::size_t>();
  if (count < 1 || !(stop >= start)) {
    throw ScenarioError("run.grid: need count >= 1 and stop >= start");
  }
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = count == 1 ? start
                         : start + (stop - start) * static_cast<double>(k) /
                                       static_cast<double>(count - 1);
  }
  return grid;
}

std::vector<std::string> parse_process_list(const json& j,
                                            const std::string& where) {
  static const std::set<std::string> valid{"Z1", "Z2", "Z3", "Z4", "Y"};
  std::vector<std::string> out = j.get<std::vector<std::string>>();
  for (const std::string& p : out) {
    if (valid.find(p) == valid.end()) {
      throw ScenarioError("unknown process '" + p + "' in " + where);
    }
  }
  return out;
}

void parse_checks(const json& j, ChecksConfig& c) {
  require_keys(j, "checks",
               {"velocity_conditional", "martingale_x", "semimartingale",
                "martingale_iff", "dissipation", "burgers", "stieltjes",
                "lax_oleinik"});
  if (j.contains("velocity_conditional")) {
    const json& v = j.at("velocity_conditional");
    require_keys(v, "checks.velocity_conditional", {"t"});
    c.velocity_conditional = true;
    c.velocity_conditional_t = v.at("t").get<double>();
  }
  if (j.contains("martingale_x")) {
    const json& v = j.at("martingale_x");
    require_keys(v, "checks.martingale_x", {"s", "t"});
    c.martingale_x = true;
    c.martingale_s = v.at("s").get<double>();
    c.martingale_t = v.at("t").get<double>();
  }
  if (j.contains("semimartingale")) {
    c.semimartingale =
        parse_process_list(j.at("semimartingale"), "checks.semimartingale");
  }
  if (j.contains("martingale_iff")) {
    const json& v = j.at("martingale_iff");
    require_keys(v, "checks.martingale_iff", {"processes", "tolerance"});
    c.martingale_iff =
        parse_process_list(v.at("processes"), "checks.martingale_iff");
    if (v.contains("tolerance")) c.iff_tolerance = v.at("tolerance").get<double>();
  }
  if (j.contains("dissipation")) {
    c.dissipation = j.at("dissipation").get<std::vector<std::string>>();
  }
  if (j.contains("burgers")) {
    const json& v = j.at("burgers");
    require_keys(v, "checks.burgers", {"t", "constant"});
    c.burgers = true;
    c.burgers_t = v.at("t").get<double>();
    if (v.contains("constant")) c.burgers_constant = v.at("constant").get<double>();
  }
  if (j.contains("stieltjes")) {
    const json& v = j.at("stieltjes");
    require_keys(v, "checks.stieltjes", {"t", "constant"});
    c.stieltjes = true;
    c.stieltjes_t = v.at("t").get<double>();
    if (v.contains("constant")) {
      c.stieltjes_constant = v.at("constant").get<double>();
    }
  }
  if (j.contains("lax_oleinik")) {
    const json& v = j.at("lax_oleinik");
    require_keys(v, "checks.lax_oleinik", {"t", "samples"});
    c.lax_oleinik = true;
    c.lax_t = v.at("t").get<double>();
    if (v.contains("samples")) c.lax_samples = v.at("samples").get<std::size_t>();
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  require_keys(root, "scenario", {"name", "model", "run", "checks", "out"});
  Scenario sc;
  sc.name = root.value("name", "scenario");

  const json& model = root.at("model");
  require_keys(model, "model", {"n", "window", "distribution", "velocity"});
  sc.n = model.at("n").get<std::size_t>();
  if (sc.n < 2) throw ScenarioError("model.n must be >= 2");
  sc.velocity = parse_velocity(model.at("velocity"));

  const json& dist = model.at("distribution");
  std::string dkind = dist.value("kind", "");
  if (dkind == "lebesgue") {
    require_keys(dist, "model.distribution", {"kind"});
    sc.window = parse_interval(model.at("window"), "model.window");
  } else if (dkind == "stieltjes") {
    require_keys(dist, "model.distribution", {"kind"});
    if (!sc.velocity->non_increasing()) {
      throw ScenarioError(
          "stieltjes distribution needs a non-increasing velocity");
    }
    sc.stieltjes_distribution = true;
    if (model.contains("window")) {
      sc.window = parse_interval(model.at("window"), "model.window");
    } else {
      sc.window = stieltjes_distribution_from(*sc.velocity).window();
    }
  } else if (dkind == "pieces") {
    require_keys(dist, "model.distribution", {"kind", "pieces", "atoms"});
    sc.window = parse_interval(model.at("window"), "model.window");
    for (const json& p : dist.at("pieces")) {
      require_keys(p, "model.distribution.pieces[]", {"interval", "density"});
      sc.pieces.push_back(
          {parse_interval(p.at("interval"), "piece interval"),
           p.at("density").get<double>()});
    }
    if (dist.contains("atoms")) {
      for (const json& a : dist.at("atoms")) {
        require_keys(a, "model.distribution.atoms[]", {"position", "mass"});
        sc.atoms.push_back(
            {a.at("position").get<double>(), a.at("mass").get<double>()});
      }
    }
  } else {
    throw ScenarioError(
        "model.distribution.kind must be lebesgue, pieces or stieltjes");
  }

  const json& run = root.at("run");
  require_keys(run, "run", {"grid", "horizon", "samples", "sweep"});
  sc.grid = parse_grid(run.at("grid"));
  sc.horizon = run.at("horizon").get<double>();
  if (!sc.grid.empty() && sc.horizon < sc.grid.back()) {
    throw ScenarioError("run.horizon must cover the grid");
  }
  if (run.contains("samples")) {
    const json& s = run.at("samples");
    require_keys(s, "run.samples", {"x0", "count", "seed"});
    if (s.contains("x0")) {
      sc.sample_x0 = s.at("x0").get<std::vector<double>>();
    }
    if (s.contains("count")) {
      sc.sample_count = s.at("count").get<std::size_t>();
      if (!s.contains("seed")) {
        throw ScenarioError("run.samples.count requires run.samples.seed");
      }
      sc.seed = s.at("seed").get<std::uint64_t>();
      sc.has_seed = true;
    }
  }
  if (run.contains("sweep")) {
    const json& s = run.at("sweep");
    require_keys(s, "run.sweep", {"ns"});
    sc.sweep_ns = s.at("ns").get<std::vector<std::size_t>>();
    if (!std::is_sorted(sc.sweep_ns.begin(), sc.sweep_ns.end())) {
      throw ScenarioError("run.sweep.ns must be increasing");
    }
  }

  if (root.contains("checks")) parse_checks(root.at("checks"), sc.checks);
  sc.out_dir = root.value("out", "out");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_schema() {
  return R"schema({
  "name": "string (optional)",
  "model": {
    "n": "integer >= 2, particle count",
    "window": "[lo, hi] (optional for stieltjes distributions)",
    "distribution": {
      "kind": "lebesgue | pieces | stieltjes",
      "pieces": "[{interval: [lo, hi), density: > 0}, ...]  (kind = pieces)",
      "atoms": "[{position, mass > 0}, ...]  (kind = pieces)"
    },
    "velocity": {
      "kind": "constant | neg_arctan | piecewise",
      "value": "number (constant)",
      "scale": "number (neg_arctan: u0(x) = -scale * atan x)",
      "breakpoints": "increasing numbers (piecewise)",
      "segments": "[{slope, intercept}, ...]; breakpoints + 1 entries, outermost slopes 0"
    }
  },
  "run": {
    "grid": "{times: [...]} or {start, stop, count}",
    "horizon": "number >= max(grid)",
    "samples": "{x0: [...]} and/or {count, seed} (inverse-CDF draws)",
    "sweep": "{ns: increasing integers} (sweep subcommand)"
  },
  "checks": {
    "velocity_conditional": "{t}",
    "martingale_x": "{s, t}",
    "semimartingale": "[\"Z1\"|\"Z2\"|\"Z3\"|\"Z4\"|\"Y\", ...]",
    "martingale_iff": "{processes: [...], tolerance?}",
    "dissipation": "[\"square\"|\"abs\"|\"exp:<k>\"|\"hinge:<c>\", ...]",
    "burgers": "{t, constant?}",
    "stieltjes": "{t, constant?}",
    "lax_oleinik": "{t, samples?}"
  },
  "out": "output directory"
}
)schema";
}

ParticleSystem build_system(const Scenario& sc) {
  if (sc.stieltjes_distribution) {
    MassDistribution dist = stieltjes_distribution_from(*sc.velocity);
    return discretize(dist, *sc.velocity, sc.n, sc.window);
  }
  if (sc.pieces.empty() && sc.atoms.empty()) {
    return discretize(MassDistribution::lebesgue(sc.window), *sc.velocity,
                      sc.n, sc.window);
  }
  MassDistribution dist(sc.pieces, sc.atoms, sc.window);
  return discretize(dist, *sc.velocity, sc.n, sc.window);
}

std::vector<double> sample_points(const Scenario& sc,
                                  const ParticleSystem& sys) {
  std::vector<double> points = sc.sample_x0;
  if (sc.sample_count > 0) {
    SplitMix64 rng(sc.seed);
    double total = sys.total_mass();
    std::vector<double> cum(sys.size());
    double run = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
      run += sys.m[i];
      cum[i] = run;
    }
    for (std::size_t k = 0; k < sc.sample_count; ++k) {
      double q = rng.next_unit() * total;
      auto it = std::lower_bound(cum.begin(), cum.end(), q);
      std::size_t idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - cum.begin()), sys.size() - 1);
      points.push_back(sys.a[idx]);
    }
  }
  return points;
}

}  // namespace adhesion
