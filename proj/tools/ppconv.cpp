#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppconv/config.hpp"
#include "ppconv/diagnostics.hpp"
#include "ppconv/io.hpp"
#include "ppconv/models.hpp"
#include "ppconv/parallel.hpp"
#include "ppconv/selftest.hpp"
#include "ppconv/thinning.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ppconv;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_runtime = 2;
constexpr int exit_selftest = 3;

constexpr double rate_slope_lo = -0.65;
constexpr double rate_slope_hi = -0.35;

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> n_list;
  std::optional<int> replicates;
  std::optional<std::string> experiment;
  std::optional<std::string> times;
  std::vector<std::string> sets;
  unsigned jobs = default_jobs();
  std::string level = "quick";
  std::vector<std::string> intensity_files;
  std::vector<std::string> window_files;
  std::optional<double> horizon;
};

/// Collects data files and writes the run manifest last.
class RunWriter {
 public:
  RunWriter(std::string command, const fs::path& dir) : command_(std::move(command)), dir_(dir) {
    fs::create_directories(dir_);
  }

  template <class Fn>
  void file(const std::string& name, Fn&& write) {
    std::ostringstream ss;
    write(ss);
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << ss.str();
    outputs_.push_back(name);
  }

  void path(const std::string& name, const auto& p) {
    file(name, [&](std::ostream& o) { write_path_csv(o, p); });
  }

  void window(const std::string& name, const PointMeasureWindow& w) {
    file(name, [&](std::ostream& o) { write_window_csv(o, w); });
  }

  void json_file(const std::string& name, const json& j) {
    file(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  void manifest(const json& config, std::uint64_t seed) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["command"] = command_;
    m["config"] = config;
    m["master_seed"] = seed;
    m["version"] = PPCONV_VERSION;
    m["outputs"] = outputs_;
    m["wall_clock_seconds"] = secs;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path dir_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json config_echo(const KeyValueConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

KeyValueConfig load_config(const Options& opt) {
  KeyValueConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    require(static_cast<bool>(in), Errc::parse, "cannot open config " + opt.config_path);
    cfg = KeyValueConfig::parse(in, opt.config_path);
  }
  for (const std::string& s : opt.sets) {
    const auto eq = s.find('=');
    require(eq != std::string::npos && eq > 0, Errc::parse, "--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
  if (opt.n_list) cfg.set("n_list", *opt.n_list);
  if (opt.replicates) cfg.set("replicates", std::to_string(*opt.replicates));
  if (opt.experiment) cfg.set("experiment", *opt.experiment);
  if (opt.times) cfg.set("times", *opt.times);
  require(cfg.has("model"), Errc::parse, "config has no 'model' key");
  check_keys(cfg);
  return cfg;
}

json diagnostics_json(const SimulationDiagnostics& d) {
  return {{"candidate_atoms", d.candidate_atoms},
          {"accepted_events", d.accepted_events},
          {"rejected_atoms", d.rejected_atoms},
          {"mark_bound", d.mark_bound}};
}

std::string indexed(const std::string& stem, std::size_t i) { return stem + "_" + std::to_string(i + 1) + ".csv"; }

void write_simulation(RunWriter& w, const SimulationOutput& out, const std::string& prefix) {
  w.path(prefix + "state.csv", out.state_path);
  w.path(prefix + "intensity.csv", out.intensity_path);
  for (std::size_t i = 0; i < out.counting_paths.size(); ++i) {
    w.path(indexed(prefix + "counting", i), out.counting_paths[i]);
    w.window(indexed(prefix + "window", i), out.windows_used[i]);
  }
}

int cmd_simulate(const Options& opt) {
  const KeyValueConfig cfg = load_config(opt);
  const std::uint64_t seed = config_seed(cfg);
  const std::string model = cfg.get_string("model");
  const RngStream root{seed, 0};
  RunWriter w("simulate", opt.out_dir);
  json summary;
  summary["model"] = model;
  summary["seed"] = seed;

  if (model == "meanfield") {
    const auto c = meanfield_config(cfg, root);
    const auto out = simulate_meanfield_prelimit(c);
    write_simulation(w, out, "");
    summary["diagnostics"] = diagnostics_json(out.diagnostics);
    if (c.horizon > 0.0) {
      const auto lim = simulate_meanfield_limit(meanfield_limit_config(cfg, RngStream{seed, 1}));
      write_simulation(w, lim, "limit_");
      summary["limit_diagnostics"] = diagnostics_json(lim.diagnostics);
    }
  } else if (model == "volterra") {
    const auto c = volterra_config(cfg, root);
    const auto out = simulate_volterra_prelimit(c);
    write_simulation(w, out, "");
    w.path("rescaled_state.csv", *out.rescaled_state_path);
    w.path("rescaled_counting_1.csv", (*out.rescaled_counting_paths)[0]);
    VolterraLimitConfig lc{c.gamma, c.horizon, c.step, c.baseline, RngStream{seed, 1}, 1.0};
    w.path("limit_state.csv", simulate_volterra_limit(lc));
    summary["diagnostics"] = diagnostics_json(out.diagnostics);
  } else {
    const auto c = hawkes_config(cfg, root);
    const auto out = simulate_hawkes_coupled(c);
    write_simulation(w, out, "");
    w.path("limit_state.csv", *out.limit_state_path);
    w.path("limit_intensity.csv", *out.limit_intensity_path);
    for (std::size_t i = 0; i < out.limit_counting_paths->size(); ++i)
      w.path(indexed("limit_counting", i), (*out.limit_counting_paths)[i]);
    summary["diagnostics"] = diagnostics_json(out.diagnostics);
  }
  w.json_file("summary.json", summary);
  w.manifest(config_echo(cfg), seed);
  return exit_ok;
}

int cmd_converge(const Options& opt) {
  const KeyValueConfig cfg = load_config(opt);
  const std::uint64_t seed = config_seed(cfg);
  const std::string model = cfg.get_string("model");
  const std::string experiment = cfg.get_string("experiment", std::string("rate"));
  const RngStream root{seed, 0};
  RunWriter w("converge", opt.out_dir);

  if (experiment == "rate") {
    require(model == "hawkes", Errc::invalid_argument, "rate experiment needs model=hawkes");
    const auto ns = parse_n_list(cfg.get_string("n_list", std::string("8,16,32,64,128,256,512")));
    const int reps = static_cast<int>(cfg.get_int("replicates", 200));
    auto c = hawkes_config(cfg, root);
    const RateCurve curve = coupling_error_curve(c, ns, reps, opt.jobs);
    w.file("rate_curve.csv", [&](std::ostream& o) {
      o << "N,mean_error,std_error,replicates\n";
      for (const auto& r : curve.rows)
        o << r.n << ',' << format_double(r.mean_error) << ',' << format_double(r.std_error) << ','
          << r.replicates << '\n';
    });
    const RateFit fit = fit_rate(curve);
    json j;
    j["experiment"] = "rate";
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["slope_tolerance"] = {rate_slope_lo, rate_slope_hi};
    j["slope_within_tolerance"] = fit.slope >= rate_slope_lo && fit.slope <= rate_slope_hi;
    j["seed"] = seed;
    j["n_list"] = ns;
    j["replicates"] = reps;
    w.json_file("rate_fit.json", j);
  } else if (experiment == "marginal") {
    require(model == "meanfield", Errc::invalid_argument, "marginal experiment needs model=meanfield");
    const auto ns = parse_n_list(cfg.get_string("n_list", std::string("4,256")));
    const int reps = static_cast<int>(cfg.get_int("replicates", 500));
    const auto c = meanfield_config(cfg, root);
    auto times = parse_times(cfg.get_string("times", std::string()));
    if (times.empty()) times.push_back(c.horizon);
    const double h = cfg.get_double("h", 0.01);
    const MarginalReport rep = marginal_report(c, ns, times, reps, h, opt.jobs);
    w.file("marginal_report.csv", [&](std::ostream& o) {
      o << "N,t,ks,wasserstein\n";
      for (const auto& r : rep.rows)
        o << r.n << ',' << format_double(r.t) << ',' << format_double(r.ks) << ','
          << format_double(r.wasserstein) << '\n';
    });
    json j;
    j["experiment"] = "marginal";
    j["times"] = times;
    j["null_ks"] = rep.null_ks;
    j["band_99"] = rep.band_99;
    j["seed"] = seed;
    j["n_list"] = ns;
    j["replicates"] = reps;
    w.json_file("marginal_summary.json", j);
  } else {
    fail(Errc::parse, "experiment must be rate or marginal, got '" + experiment + "'");
  }
  w.manifest(config_echo(cfg), seed);
  return exit_ok;
}

json report_json(const ContinuityReport& r) {
  auto refs = [](const std::vector<AtomRef>& v) {
    json a = json::array();
    for (const AtomRef& x : v) a.push_back({{"measure", x.measure}, {"t", x.t}, {"z", x.z}});
    return a;
  };
  return {{"a", r.condition_a},       {"b", r.condition_b},       {"c", r.condition_c},
          {"d", r.condition_d},       {"violations_a", refs(r.violations_a)},
          {"violations_b", refs(r.violations_b)}, {"violations_c", refs(r.violations_c)},
          {"violations_d", refs(r.violations_d)}};
}

json jumps_json(const StepPath& p) { return {{"jump_count", p.jump_count()}, {"jump_times", p.jump_times()}}; }

int cmd_counterexample(const Options& opt) {
  constexpr double horizon = 2.0;
  RunWriter w("counterexample", opt.out_dir);
  const PointMeasureWindow window(horizon, 1.0, false, {{1.0, 1.0, {}}});
  const StepPath x = StepPath::constant(1.0, horizon);
  const ThinningInput base{{x}, {window}, horizon};
  const StepPath phi_x = phi(base)[0];
  w.window("window.csv", window);
  w.path("x.csv", x);
  w.path("phi_x.csv", phi_x);

  json report;
  report["phi_x"] = jumps_json(phi_x);
  bool holds = phi_x.jump_count() == 1 && phi_x.jump_times().front() == 1.0;
  json xn = json::object();
  for (int n : {1, 2, 4, 8, 16}) {
    const LinearPath xp = tent_dip_path(n, horizon);
    const StepPath out = phi(ThinningInput{{xp}, {window}, horizon})[0];
    w.path("x_n" + std::to_string(n) + ".csv", xp);
    w.path("phi_x_n" + std::to_string(n) + ".csv", out);
    xn[std::to_string(n)] = jumps_json(out);
    holds = holds && out.jump_count() == 0;
  }
  report["phi_xn"] = xn;
  const ContinuityReport cond = check_conditions(base);
  report["conditions"] = report_json(cond);
  holds = holds && !cond.condition_d;
  report["asserted"] = holds;
  w.json_file("report.json", report);
  w.manifest(json::object(), 0);
  if (!holds) {
    std::cerr << "counterexample assertions failed\n";
    return exit_runtime;
  }
  return exit_ok;
}

int cmd_phi(const Options& opt) {
  require(!opt.intensity_files.empty(), Errc::invalid_argument, "phi needs at least one --intensity");
  require(opt.intensity_files.size() == opt.window_files.size(), Errc::invalid_argument,
          "phi needs one --window per --intensity");
  ThinningInput in;
  for (std::size_t j = 0; j < opt.intensity_files.size(); ++j) {
    std::ifstream pi(opt.intensity_files[j]);
    require(static_cast<bool>(pi), Errc::parse, "cannot open " + opt.intensity_files[j]);
    in.intensities.push_back(read_path_csv(pi, opt.intensity_files[j]));
    std::ifstream wi(opt.window_files[j]);
    require(static_cast<bool>(wi), Errc::parse, "cannot open " + opt.window_files[j]);
    in.measures.push_back(read_window_csv(wi, opt.window_files[j]));
  }
  if (opt.horizon) {
    in.horizon = *opt.horizon;
  } else {
    in.horizon = horizon_of(in.intensities.front());
    for (std::size_t j = 0; j < in.measures.size(); ++j)
      in.horizon = std::min({in.horizon, horizon_of(in.intensities[j]), in.measures[j].horizon()});
  }
  const PathVector out = phi(in);
  RunWriter w("phi", opt.out_dir);
  for (std::size_t j = 0; j < out.size(); ++j) w.path(indexed("counting", j), out[j]);
  w.json_file("conditions.json", report_json(check_conditions(in)));
  json echo;
  echo["intensity"] = opt.intensity_files;
  echo["window"] = opt.window_files;
  echo["horizon"] = in.horizon;
  w.manifest(echo, 0);
  return exit_ok;
}

int cmd_selftest(const Options& opt) {
  require(opt.level == "quick" || opt.level == "full", Errc::invalid_argument, "level must be quick or full");
  const SelftestLevel level = opt.level == "quick" ? SelftestLevel::quick : SelftestLevel::full;
  const std::uint64_t seed = opt.seed.value_or(default_seed);
  const auto results = run_selftest(level, seed);
  json j;
  j["level"] = opt.level;
  j["seed"] = seed;
  bool ok = true;
  json entries = json::array();
  for (const auto& r : results) {
    entries.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    ok = ok && r.passed;
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
  }
  j["invariants"] = entries;
  j["passed"] = ok;
  std::cout << j.dump(2) << '\n';
  if (!opt.out_dir.empty()) {
    RunWriter w("selftest", opt.out_dir);
    w.json_file("selftest.json", j);
    w.manifest(json{{"level", opt.level}}, seed);
  }
  return ok ? exit_ok : exit_selftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinning-based point process simulator and convergence diagnostics"};
  app.set_version_flag("--version", std::string(PPCONV_VERSION));
  app.require_subcommand(1);
  Options opt;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key=value config file");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "master seed (overrides config)");
    sub->add_option("--set", opt.sets, "override a config key, key=value");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "simulate one model run");
  add_run_flags(simulate);

  auto* converge = app.add_subcommand("converge", "rate or marginal convergence experiment");
  add_run_flags(converge);
  converge->add_option("--n-list", opt.n_list, "comma separated N values");
  converge->add_option("--replicates", opt.replicates, "replicates per N");
  converge->add_option("--experiment", opt.experiment, "rate or marginal");
  converge->add_option("--times", opt.times, "comma separated observation times (marginal)");

  auto* counterexample = app.add_subcommand("counterexample", "thinning discontinuity witness");
  counterexample->add_option("--out", opt.out_dir, "output directory");

  auto* phi_cmd = app.add_subcommand("phi", "thin window files by intensity path files");
  phi_cmd->add_option("--intensity", opt.intensity_files, "intensity path CSV (repeat per component)")->required();
  phi_cmd->add_option("--window", opt.window_files, "window CSV (repeat per component)")->required();
  phi_cmd->add_option("--horizon", opt.horizon, "thinning horizon");
  phi_cmd->add_option("--out", opt.out_dir, "output directory");

  auto* selftest = app.add_subcommand("selftest", "run the property suites");
  selftest->add_option("--level", opt.level, "quick or full");
  selftest->add_option("--seed", opt.seed, "master seed");
  std::string selftest_out;
  selftest->add_option("--out", selftest_out, "directory for selftest.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (*simulate) return cmd_simulate(opt);
    if (*converge) return cmd_converge(opt);
    if (*counterexample) return cmd_counterexample(opt);
    if (*phi_cmd) return cmd_phi(opt);
    opt.out_dir = selftest_out;
    return cmd_selftest(opt);
  } catch (const Error& e) {
    std::cerr << "ppconv: " << e.what() << '\n';
    return e.is_validation() ? exit_validation : exit_runtime;
  } catch (const std::exception& e) {
    std::cerr << "ppconv: " << e.what() << '\n';
    return exit_runtime;
  }
}
