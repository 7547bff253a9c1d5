// eloteams: command-line front end for the team rating simulations.
//
//   eloteams run --preset r1 --n-teams 50 --steps 1e4 --out runs/r1
//   eloteams check --nu 0.1 --sigma 2
//   eloteams analyze --scatter runs/r1/scatter.csv --out runs/r1/analysis

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "elo/errors.hpp"
#include "elo/experiment.hpp"

namespace ex = elo::experiment;

namespace {

struct Overrides {
  std::optional<std::string> mode;
  std::optional<std::string> preset;
  std::optional<std::string> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<double> nu, sigma, gamma, dt;
  std::optional<std::string> n_teams, steps, realizations;
  std::optional<std::string> kernel;
  std::optional<int> threads;
  std::optional<double> z_lo, z_hi;
  std::optional<double> t_end;
  std::optional<std::string> scatter, moments, snapshot;
  bool paper_scale = false;
  bool write_trajectories = false;
  std::string out = "eloteams_out";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw elo::ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A manifest.json is accepted as a config file: its "config" object holds
// the same keys as config.txt.
std::string config_text_from(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() < 5 || path.substr(path.size() - 5) != ".json") return text;
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("config") || !j["config"].is_object()) {
    throw elo::ConfigError(path + ": not a manifest with a config object");
  }
  std::string out;
  for (const auto& [key, value] : j["config"].items()) {
    if (!value.is_string()) throw elo::ConfigError(path + ": config value for '" + key + "' is not a string");
    out += key + " = " + value.get<std::string>() + "\n";
  }
  return out;
}

ex::ExperimentConfig build_config(const Overrides& o, std::optional<ex::Mode> forced_mode) {
  ex::ExperimentConfig cfg;
  if (o.preset) cfg = ex::preset_config(*o.preset, o.paper_scale);
  cfg.paper_scale = cfg.paper_scale || o.paper_scale;
  if (o.config_file) ex::apply_config_text(cfg, config_text_from(*o.config_file));
  if (o.mode) cfg.mode = ex::parse_mode(*o.mode);
  if (forced_mode) cfg.mode = *forced_mode;

  auto set = [&](const char* key, const std::string& value) {
    ex::apply_config_text(cfg, std::string(key) + " = " + value);
  };
  auto real = [](double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
  };
  if (o.seed) set("seed", std::to_string(*o.seed));
  if (o.threads) set("threads", std::to_string(*o.threads));
  if (o.n_teams) set("n_teams", *o.n_teams);
  if (o.steps) set("steps", *o.steps);
  if (o.realizations) set("realizations", *o.realizations);
  if (o.gamma) set("gamma_rating", real(*o.gamma));
  if (o.kernel) set("kernel", *o.kernel);
  if (o.t_end) set("t_end_time", real(*o.t_end));
  if (o.z_lo) set("z_lo_rating", real(*o.z_lo));
  if (o.z_hi) set("z_hi_rating", real(*o.z_hi));
  if (o.scatter) cfg.scatter_file = *o.scatter;
  if (o.moments) cfg.moments_file = *o.moments;
  if (o.snapshot) cfg.snapshot_file = *o.snapshot;
  if (o.write_trajectories) cfg.write_trajectories = true;

  // In the sweep presets the swept parameter's flag narrows the sweep.
  if (o.nu) {
    if (cfg.preset == "fig7-nu-sweep") {
      cfg.sweep = {*o.nu};
    } else {
      cfg.nu = *o.nu;
    }
  }
  if (o.sigma) {
    if (cfg.preset == "fig5-sweep") {
      cfg.sweep = {*o.sigma};
    } else {
      cfg.sigma = *o.sigma;
    }
  }
  if (o.dt) {
    const bool macro = cfg.mode == ex::Mode::Macro || cfg.mode == ex::Mode::Macro2d;
    (macro ? cfg.macro_dt : cfg.micro_dt) = *o.dt;
  }
  return cfg;
}

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--seed", o.seed, "Master RNG seed");
  app.add_option("--config", o.config_file, "key = value config file (or a manifest.json)");
  app.add_option("--nu", o.nu, "Steepness of b(z) = tanh(nu z)");
  app.add_option("--sigma", o.sigma, "Strength standard deviation");
}

void print_report(const ex::RunReport& report, std::ostream& os) {
  for (const auto& c : report.checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  for (const auto& n : report.notes) os << "note: " << n << '\n';
  for (const auto& w : report.warnings) os << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elo ratings for teams with fluctuating strength"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "Run a preset or a custom micro/macro experiment");
  add_common(*run, o);
  run->add_option("--mode", o.mode, "micro | macro | macro2d | analyze | check");
  run->add_option("--preset", o.preset, "r1 | r2 | fig4-uniform | fig5-sweep | fig7-nu-sweep");
  run->add_option("--out", o.out, "Output directory");
  run->add_option("--gamma", o.gamma, "Rating update step");
  run->add_option("--dt", o.dt, "Time step of the engine being run");
  run->add_option("--t-end", o.t_end, "Final macro time");
  run->add_option("--n-teams", o.n_teams, "Number of teams");
  run->add_option("--steps", o.steps, "Micro steps (accepts 1e4)");
  run->add_option("--realizations", o.realizations, "Independent micro realizations");
  run->add_option("--kernel", o.kernel, "all | indicator:c | bump");
  run->add_option("--threads", o.threads, "Worker cap (0 = hardware concurrency)");
  run->add_flag("--paper-scale", o.paper_scale, "Use the full-size preset parameters");
  run->add_flag("--write-trajectories", o.write_trajectories, "Also write per-team trajectories");

  auto* chk = app.add_subcommand("check", "Check monotonicity of b + sigma^2 b'' on a z range");
  add_common(*chk, o);
  chk->add_option("--z-lo", o.z_lo, "Lower end of the z range");
  chk->add_option("--z-hi", o.z_hi, "Upper end of the z range");

  auto* ana = app.add_subcommand("analyze", "Post-process CSV outputs");
  add_common(*ana, o);
  ana->add_option("--out", o.out, "Output directory");
  ana->add_option("--scatter", o.scatter, "Scatter CSV");
  ana->add_option("--moments", o.moments, "Moments CSV");
  ana->add_option("--snapshot", o.snapshot, "Density snapshot CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ex::kExitOk : ex::kExitConfig;
  }

  try {
    if (chk->parsed()) {
      const auto cfg = build_config(o, ex::Mode::Check);
      const auto report = ex::run_check(cfg);
      const auto& c = report.checks.front();
      std::cout << (c.passed ? "(B') holds" : "(B') fails") << " for nu = " << cfg.nu << ", sigma = " << cfg.sigma
                << " on [" << cfg.z_lo << ", " << cfg.z_hi << "]: " << c.detail << '\n';
      return c.passed ? ex::kExitOk : ex::kExitCheckFailed;
    }
    const auto cfg = build_config(o, ana->parsed() ? std::optional(ex::Mode::Analyze) : std::nullopt);
    if (cfg.mode == ex::Mode::Check) {
      const auto report = ex::run_check(cfg);
      print_report(report, std::cout);
      return report.all_passed() ? ex::kExitOk : ex::kExitCheckFailed;
    }
    const auto report = ex::run_experiment(cfg, o.out);
    print_report(report, std::cout);
    std::cout << "outputs in " << o.out << '\n';
    return report.all_passed() ? ex::kExitOk : ex::kExitCheckFailed;
  } catch (const elo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ex::kExitConfig;
  } catch (const elo::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ex::kExitConfig;
  } catch (const elo::CflError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ex::kExitNumerical;
  } catch (const elo::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ex::kExitNumerical;
  } catch (const elo::EnumerationTooLarge& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ex::kExitConfig;
  }
}
