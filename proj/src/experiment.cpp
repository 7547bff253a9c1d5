#include "elo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "elo/analysis.hpp"
#include "elo/csv_io.hpp"
#include "elo/errors.hpp"
#include "elo/macro.hpp"
#include "elo/model.hpp"

namespace elo::experiment {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x)) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return x;
}

// Integers accept scientific notation ("1e4") as long as the value is integral.
std::int64_t parse_integer(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return static_cast<std::int64_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: '" + key + "' expects true|false, got '" + v + "'");
}

std::string population_name(PopulationKind k) {
  switch (k) {
    case PopulationKind::Gaussian:
      return "gaussian";
    case PopulationKind::SetupR1:
      return "r1";
    case PopulationKind::SetupR2:
      return "r2";
  }
  return "gaussian";
}

PopulationKind parse_population(const std::string& v) {
  if (v == "gaussian") return PopulationKind::Gaussian;
  if (v == "r1") return PopulationKind::SetupR1;
  if (v == "r2") return PopulationKind::SetupR2;
  throw ConfigError("config: population must be gaussian|r1|r2, got '" + v + "'");
}

std::string lineup_name(micro::LineupMode m) {
  switch (m) {
    case micro::LineupMode::UniformSubset:
      return "uniform";
    case micro::LineupMode::StrengthProportional:
      return "proportional";
    case micro::LineupMode::GaussianDraw:
      return "gaussian";
  }
  return "uniform";
}

micro::LineupMode parse_lineup(const std::string& v) {
  if (v == "uniform") return micro::LineupMode::UniformSubset;
  if (v == "proportional") return micro::LineupMode::StrengthProportional;
  if (v == "gaussian") return micro::LineupMode::GaussianDraw;
  throw ConfigError("config: lineup_mode must be uniform|proportional|gaussian, got '" + v + "'");
}

std::string join_reals(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) s += ',';
    s += num(xs[k]);
  }
  return s;
}

std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_real(key, item));
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define REAL_FIELD(KEY, MEMBER)                                                                \
  Field {                                                                                      \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_real(KEY, v); },     \
        [](const ExperimentConfig& c) { return num(c.MEMBER); }                                \
  }
#define INT_FIELD(KEY, MEMBER)                                                                 \
  Field {                                                                                      \
    KEY,                                                                                       \
        [](ExperimentConfig& c, const std::string& v) {                                        \
          c.MEMBER = static_cast<decltype(c.MEMBER)>(parse_integer(KEY, v));                   \
        },                                                                                     \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }                     \
  }
#define STRING_FIELD(KEY, MEMBER)                                                              \
  Field {                                                                                      \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = v; },                      \
        [](const ExperimentConfig& c) { return c.MEMBER; }                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      Field{"mode", [](ExperimentConfig& c, const std::string& v) { c.mode = parse_mode(v); },
            [](const ExperimentConfig& c) { return to_string(c.mode); }},
      STRING_FIELD("preset", preset),
      Field{"seed",
            [](ExperimentConfig& c, const std::string& v) {
              std::size_t used = 0;
              unsigned long long s = 0;
              try {
                s = std::stoull(v, &used);
              } catch (const std::exception&) {
                used = 0;
              }
              if (used == 0 || used != v.size()) throw ConfigError("config: seed must be a nonnegative integer");
              c.seed = s;
            },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      INT_FIELD("threads", threads),
      Field{"paper_scale", [](ExperimentConfig& c, const std::string& v) { c.paper_scale = parse_bool("paper_scale", v); },
            [](const ExperimentConfig& c) { return std::string(c.paper_scale ? "true" : "false"); }},
      Field{"population", [](ExperimentConfig& c, const std::string& v) { c.population = parse_population(v); },
            [](const ExperimentConfig& c) { return population_name(c.population); }},
      INT_FIELD("n_teams", n_teams),
      INT_FIELD("steps", steps),
      INT_FIELD("realizations", realizations),
      INT_FIELD("matches_per_step", matches_per_step),
      REAL_FIELD("micro_dt_time", micro_dt),
      REAL_FIELD("gamma_rating", gamma),
      REAL_FIELD("special_sigma_rating", special_sigma),
      Field{"initial_rating",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "auto") {
                c.initial_rating.reset();
              } else {
                c.initial_rating = parse_real("initial_rating", v);
              }
            },
            [](const ExperimentConfig& c) { return c.initial_rating ? num(*c.initial_rating) : std::string("auto"); }},
      Field{"lineup_mode", [](ExperimentConfig& c, const std::string& v) { c.lineup_mode = parse_lineup(v); },
            [](const ExperimentConfig& c) { return lineup_name(c.lineup_mode); }},
      INT_FIELD("snapshot_stride_steps", snapshot_stride),
      Field{"write_trajectories",
            [](ExperimentConfig& c, const std::string& v) { c.write_trajectories = parse_bool("write_trajectories", v); },
            [](const ExperimentConfig& c) { return std::string(c.write_trajectories ? "true" : "false"); }},
      REAL_FIELD("nu_per_rating", nu),
      REAL_FIELD("sigma_rating", sigma),
      Field{"kernel", [](ExperimentConfig& c, const std::string& v) { c.kernel = InteractionKernel::parse(v); },
            [](const ExperimentConfig& c) { return c.kernel.to_string(); }},
      REAL_FIELD("theta_lo_rating", theta_lo),
      REAL_FIELD("theta_hi_rating", theta_hi),
      Field{"sweep_values", [](ExperimentConfig& c, const std::string& v) { c.sweep = parse_reals("sweep_values", v); },
            [](const ExperimentConfig& c) { return join_reals(c.sweep); }},
      REAL_FIELD("r_lo_rating", r_lo),
      REAL_FIELD("r_hi_rating", r_hi),
      REAL_FIELD("sigma_lo_rating", sigma_lo),
      REAL_FIELD("sigma_hi_rating", sigma_hi),
      INT_FIELD("n_theta_cells", n_theta),
      INT_FIELD("n_r_cells", n_r),
      INT_FIELD("n_sigma_cells", n_sigma),
      REAL_FIELD("macro_dt_time", macro_dt),
      REAL_FIELD("t_end_time", t_end),
      REAL_FIELD("cfl_safety", cfl_safety),
      INT_FIELD("macro_snapshot_stride_steps", macro_snapshot_stride),
      INT_FIELD("velocity_refresh_steps", velocity_refresh),
      STRING_FIELD("scatter_file", scatter_file),
      STRING_FIELD("moments_file", moments_file),
      STRING_FIELD("snapshot_file", snapshot_file),
      REAL_FIELD("z_lo_rating", z_lo),
      REAL_FIELD("z_hi_rating", z_hi),
  };
  return table;
}

#undef REAL_FIELD
#undef INT_FIELD
#undef STRING_FIELD

std::string format_sweep_tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  std::string s = buf;
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

micro::MicroConfig micro_config(const ExperimentConfig& c) {
  micro::MicroConfig m;
  m.dt = c.micro_dt;
  m.matches_per_step = c.matches_per_step;
  m.n_steps = c.steps;
  m.realizations = c.realizations;
  m.gamma = c.gamma;
  m.nu = c.nu;
  m.kernel = c.kernel;
  m.lineup_mode = c.lineup_mode;
  m.seed = c.seed;
  m.snapshot_stride = c.snapshot_stride;
  m.threads = c.threads;
  return m;
}

micro::Population build_population(const ExperimentConfig& c) {
  const double r0 = c.effective_initial_rating();
  switch (c.population) {
    case PopulationKind::SetupR1:
      return micro::build_setup_r1(c.n_teams, c.seed, r0);
    case PopulationKind::SetupR2:
      return micro::build_setup_r2(c.n_teams, c.seed, c.special_sigma, r0);
    case PopulationKind::Gaussian: {
      const auto thetas = micro::uniform_thetas(c.n_teams, c.theta_lo, c.theta_hi, c.seed);
      return micro::build_gaussian_population(thetas, c.sigma, r0);
    }
  }
  throw ConfigError("unknown population");
}

std::vector<std::pair<double, double>> slope_series(const micro::MicroResult& res, std::span<const double> thetas) {
  std::vector<std::pair<double, double>> out;
  const int n = static_cast<int>(thetas.size());
  for (const auto& snap : micro::realization_means(res, n)) {
    std::vector<analysis::ScatterPoint> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = {thetas[i], snap.mean_rating[i]};
    out.emplace_back(snap.time, analysis::regression_slope(pts));
  }
  return out;
}

// Largest deviation of the realization's rating sum from its initial value.
double worst_sum_drift(const micro::MicroResult& res) {
  double worst = 0.0;
  double initial = 0.0;
  for (const auto& rec : res.records) {
    double s = 0.0;
    for (const auto& t : rec.teams) s += t.rating;
    if (rec.time == 0.0) initial = s;
    worst = std::max(worst, std::abs(s - initial));
  }
  return worst;
}

CheckResult check(std::string name, bool passed, std::string detail) {
  return CheckResult{std::move(name), passed, std::move(detail)};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

class Writer {
 public:
  Writer(fs::path dir, RunReport& report) : dir_(std::move(dir)), report_(report) {}
  fs::path file(const std::string& name) {
    report_.files.push_back(name);
    return dir_ / name;
  }

 private:
  fs::path dir_;
  RunReport& report_;
};

struct MicroOutputs {
  micro::MicroResult result;
  std::vector<analysis::ScatterPoint> points;
  std::vector<std::pair<double, double>> slopes;
};

MicroOutputs run_micro_engine(const ExperimentConfig& c, const micro::Population& pop, Writer& w,
                              RunReport& report, const std::string& tag) {
  MicroOutputs o;
  o.result = micro::run_micro(pop, micro_config(c));
  o.points = analysis::to_points(o.result.scatter);
  o.slopes = slope_series(o.result, pop.thetas());
  io::write_scatter(w.file("scatter" + tag + ".csv"), o.result.scatter);
  io::write_series(w.file("slope_series" + tag + ".csv"), "t", "slope", o.slopes);
  if (c.write_trajectories) io::write_trajectories(w.file("trajectories" + tag + ".csv"), o.result.records);
  const double drift = worst_sum_drift(o.result);
  report.checks.push_back(check("rating_sum_conserved" + tag, drift <= 1e-9, "max |sum R(t) - sum R(0)| = " + fmt(drift)));
  return o;
}

macro::DensityGrid uniform_grid(const ExperimentConfig& c, bool three_d) {
  const macro::Axis th{c.theta_lo, c.theta_hi, c.n_theta};
  const macro::Axis r{c.r_lo, c.r_hi, c.n_r};
  if (three_d) return macro::uniform_density(macro::DensityGrid(th, macro::Axis{c.sigma_lo, c.sigma_hi, c.n_sigma}, r));
  return macro::uniform_density(macro::DensityGrid(th, r));
}

macro::MacroConfig macro_config(const ExperimentConfig& c, double sigma_const) {
  macro::MacroConfig m;
  m.dt = c.macro_dt;
  m.t_end = c.t_end;
  m.nu = c.nu;
  m.sigma_const = sigma_const;
  m.kernel = c.kernel;
  m.cfl_safety = c.cfl_safety;
  m.snapshot_stride = c.macro_snapshot_stride;
  m.velocity_refresh = c.velocity_refresh;
  return m;
}

void macro_common_checks(const macro::MacroResult& res, RunReport& report, const std::string& tag) {
  const double m0 = res.moments.front().mass;
  double drift = 0.0;
  for (const auto& m : res.moments) drift = std::max(drift, std::abs(m.mass - m0) / m0);
  report.checks.push_back(check("mass_conserved" + tag, drift <= 1e-9, "max relative mass drift = " + fmt(drift)));
  report.checks.push_back(check("nonnegative" + tag, res.min_value >= -1e-14, "min cell value = " + fmt(res.min_value)));
  for (const auto& wmsg : res.warnings) report.warnings.push_back(wmsg);
}

CheckResult second_moment_check(std::span<const analysis::MomentReport> moments, const std::string& tag) {
  int violations = 0;
  double worst = 0.0;
  for (std::size_t k = 1; k < moments.size(); ++k) {
    const double inc = moments[k].m2_r_centered - moments[k - 1].m2_r_centered;
    if (inc > 1e-12) {
      ++violations;
      worst = std::max(worst, inc);
    }
  }
  return check("m2_r_nonincreasing" + tag, violations == 0,
               std::to_string(violations) + " increases beyond 1e-12 (largest " + fmt(worst) + ")");
}

void write_macro_outputs(const macro::MacroResult& res, Writer& w, const std::string& tag) {
  io::write_moments(w.file("moments" + tag + ".csv"), res.moments);
  const auto& f = res.snapshots.back().f;
  io::write_snapshot(w.file("snapshot_final" + tag + ".csv"), f);
  io::write_marginal(w.file("marginal_r" + tag + ".csv"), "r", f.r(), f.r_marginal());
  io::write_marginal(w.file("marginal_theta" + tag + ".csv"), "theta", f.theta(), f.theta_marginal());
  if (f.has_sigma()) {
    io::write_marginal(w.file("marginal_sigma" + tag + ".csv"), "sigma", f.sigma(), f.sigma_marginal());
    io::write_snapshot(w.file("marginal_theta_r" + tag + ".csv"), macro::reduce_to_2d(f, 0.0).f);
  }
  const auto cond = f.conditional_mean_r();
  std::vector<std::pair<double, double>> series;
  for (int l = 0; l < f.n_theta(); ++l) series.emplace_back(f.theta().center(l), cond[l]);
  io::write_series(w.file("conditional_mean_r" + tag + ".csv"), "theta", "mean_r", series);
}

void run_micro_mode(const ExperimentConfig& c, Writer& w, RunReport& report) {
  const auto pop = build_population(c);
  const auto o = run_micro_engine(c, pop, w, report, "");
  const double slope = analysis::regression_slope(o.points);
  const double comp = analysis::compression_metric(o.points);
  report.notes.push_back("terminal slope of R on theta = " + fmt(slope));
  report.notes.push_back("compression metric = " + fmt(comp));
  if (c.preset == "r1") {
    report.checks.push_back(check("compression_negative", comp < 0.0, "compression metric = " + fmt(comp)));
  }
  if (c.preset == "r2") {
    const int n = pop.size();
    const auto& sc = o.result.scatter;
    const double ger = sc[n - 2].rating_mean - sc[n - 2].theta;
    const double bra = sc[n - 1].rating_mean - sc[n - 1].theta;
    report.checks.push_back(check("outliers_underperform", ger < 0.0 && bra < 0.0,
                                  "R - theta: team " + std::to_string(n - 1) + " " + fmt(ger) + ", team " +
                                      std::to_string(n) + " " + fmt(bra)));
  }
}

void run_macro_mode(const ExperimentConfig& c, Writer& w, RunReport& report) {
  const auto f0 = uniform_grid(c, true);
  const auto res = macro::run_macro(f0, macro_config(c, 0.0));
  write_macro_outputs(res, w, "");
  macro_common_checks(res, report, "");
  report.checks.push_back(second_moment_check(res.moments, ""));
  if (c.preset == "fig4-uniform") {
    // E[r | theta] increasing on the theta band [6, 8]
    const auto& f = res.snapshots.back().f;
    const auto cond = f.conditional_mean_r();
    bool increasing = true;
    double prev = -1e300;
    int cells = 0;
    for (int l = 0; l < f.n_theta(); ++l) {
      const double th = f.theta().center(l);
      if (th < 6.0 || th > 8.0) continue;
      ++cells;
      if (!(cond[l] > prev)) increasing = false;
      prev = cond[l];
    }
    report.checks.push_back(check("mean_rating_increasing_6_8", increasing && cells >= 2,
                                  std::to_string(cells) + " theta cells in [6, 8]"));
  }
}

void run_macro2d_mode(const ExperimentConfig& c, Writer& w, RunReport& report) {
  const auto f0 = uniform_grid(c, false);
  const auto res = macro::run_macro(f0, macro_config(c, c.sigma));
  write_macro_outputs(res, w, "");
  macro_common_checks(res, report, "");
  const auto series = analysis::energy_series(res.moments);
  const auto b = RatingFunction::tanh(c.nu);
  const analysis::Support support{c.theta_lo, c.theta_hi, c.r_lo, c.r_hi};
  const auto verdict = analysis::check_energy_decay(series, b, c.kernel, support, c.sigma);
  report.notes.push_back("energy decay: " + verdict.message);
  if (verdict.assumption_holds) {
    report.checks.push_back(check("energy_monotone", verdict.monotone, verdict.message));
    report.checks.push_back(check("energy_bound", verdict.bound_satisfied,
                                  "worst E / bound = " + fmt(verdict.worst_bound_ratio)));
  }
}

void run_fig5(const ExperimentConfig& c, Writer& w, RunReport& report) {
  const auto sigmas = c.sweep.empty() ? std::vector<double>{0.0, 1.0} : c.sweep;
  const auto thetas = micro::uniform_thetas(c.n_teams, c.theta_lo, c.theta_hi, c.seed);
  const double r0 = c.effective_initial_rating();
  const double tau = analysis::macro_time_per_micro_step(micro_config(c), c.n_teams);
  const double t_macro = tau * static_cast<double>(c.steps);
  report.notes.push_back("matched macro time t = " + fmt(t_macro) + " for " + std::to_string(c.steps) + " micro steps");
  for (double s : sigmas) {
    const std::string tag = "_sigma" + format_sweep_tag(s);
    ExperimentConfig cs = c;
    cs.sigma = s;
    cs.lineup_mode = micro::LineupMode::GaussianDraw;
    const auto pop = micro::build_gaussian_population(thetas, s, r0);
    const auto o = run_micro_engine(cs, pop, w, report, tag);

    std::vector<analysis::ScatterPoint> initial;
    for (double th : thetas) initial.push_back({th, r0});
    const macro::Axis th_axis{c.theta_lo, c.theta_hi, c.n_theta};
    const macro::Axis r_axis{c.r_lo, c.r_hi, c.n_r};
    auto f0 = analysis::density_from_sample(initial, th_axis, r_axis);
    cs.t_end = t_macro;
    const auto res = macro::run_macro(f0, macro_config(cs, s));
    write_macro_outputs(res, w, tag);
    macro_common_checks(res, report, tag);
    const double dist = analysis::micro_macro_distance(o.points, res.snapshots.back().f);
    report.checks.push_back(check("micro_macro_distance" + tag, dist <= 0.5, "sup |micro - macro| = " + fmt(dist)));
    report.notes.push_back("sigma = " + fmt(s) + ": micro slope " + fmt(analysis::regression_slope(o.points)));
  }
}

void run_fig7(const ExperimentConfig& c, Writer& w, RunReport& report) {
  const auto nus = c.sweep.empty() ? std::vector<double>{1.0, 0.1, 0.01} : c.sweep;
  const auto thetas = micro::uniform_thetas(c.n_teams, c.theta_lo, c.theta_hi, c.seed);
  const double r0 = c.effective_initial_rating();
  std::vector<double> slopes;
  std::vector<std::optional<double>> conv;
  for (double nu : nus) {
    const std::string tag = "_nu" + format_sweep_tag(nu);
    ExperimentConfig cn = c;
    cn.nu = nu;
    cn.lineup_mode = micro::LineupMode::GaussianDraw;
    const auto pop = micro::build_gaussian_population(thetas, c.sigma, r0);
    const auto o = run_micro_engine(cn, pop, w, report, tag);
    slopes.push_back(analysis::regression_slope(o.points));
    conv.push_back(analysis::convergence_time(o.slopes, 0.9));
    report.notes.push_back("nu = " + fmt(nu) + ": terminal slope " + fmt(slopes.back()) + ", compression " +
                           fmt(analysis::compression_metric(o.points)) + ", convergence time " +
                           (conv.back() ? fmt(*conv.back()) : std::string("n/a")));
  }
  const auto find = [&](double nu) -> int {
    for (std::size_t k = 0; k < nus.size(); ++k)
      if (nus[k] == nu) return static_cast<int>(k);
    return -1;
  };
  const int i1 = find(1.0), i01 = find(0.1), i001 = find(0.01);
  if (i1 >= 0 && i01 >= 0 && i001 >= 0) {
    const bool ordered = slopes[i1] < slopes[i01] && slopes[i01] <= slopes[i001];
    report.checks.push_back(check("slope_ordering", ordered,
                                  "slopes " + fmt(slopes[i1]) + " < " + fmt(slopes[i01]) + " <= " + fmt(slopes[i001])));
    report.checks.push_back(check("slope_nu0.01_near_one", std::abs(slopes[i001] - 1.0) <= 0.1,
                                  "slope = " + fmt(slopes[i001])));
    const bool slower = conv[i001] && conv[i01] && *conv[i001] > *conv[i01];
    report.checks.push_back(check("smaller_nu_converges_slower", slower,
                                  "convergence times " + (conv[i01] ? fmt(*conv[i01]) : std::string("n/a")) + " vs " +
                                      (conv[i001] ? fmt(*conv[i001]) : std::string("n/a"))));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string verdict_text(const RunReport& report) {
  std::ostringstream os;
  for (const auto& c : report.checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  for (const auto& n : report.notes) os << "NOTE " << n << '\n';
  for (const auto& wmsg : report.warnings) os << "WARN " << wmsg << '\n';
  return os.str();
}

void prepare_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("output directory not writable: " + out.string());
  const auto probe = out / ".write_test";
  {
    std::ofstream t(probe);
    if (!t) throw ConfigError("output directory not writable: " + out.string());
  }
  fs::remove(probe, ec);
}

nlohmann::json scale_factors(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  if (c.preset.empty()) return j;
  const auto paper = preset_config(c.preset, true);
  const auto ratio = [](double paper_value, double value) { return value != 0.0 ? paper_value / value : 0.0; };
  j["n_teams"] = ratio(paper.n_teams, c.n_teams);
  j["steps"] = ratio(static_cast<double>(paper.steps), static_cast<double>(c.steps));
  j["realizations"] = ratio(paper.realizations, c.realizations);
  j["n_theta_cells"] = ratio(paper.n_theta, c.n_theta);
  j["n_r_cells"] = ratio(paper.n_r, c.n_r);
  j["n_sigma_cells"] = ratio(paper.n_sigma, c.n_sigma);
  j["macro_dt"] = ratio(paper.macro_dt, c.macro_dt);
  j["t_end"] = ratio(paper.t_end, c.t_end);
  return j;
}

}  // namespace

Mode parse_mode(std::string_view text) {
  if (text == "micro") return Mode::Micro;
  if (text == "macro") return Mode::Macro;
  if (text == "macro2d") return Mode::Macro2d;
  if (text == "analyze") return Mode::Analyze;
  if (text == "check") return Mode::Check;
  throw ConfigError("mode must be micro|macro|macro2d|analyze|check, got '" + std::string(text) + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Micro:
      return "micro";
    case Mode::Macro:
      return "macro";
    case Mode::Macro2d:
      return "macro2d";
    case Mode::Analyze:
      return "analyze";
    case Mode::Check:
      return "check";
  }
  return "micro";
}

ExperimentConfig preset_config(std::string_view name, bool paper_scale) {
  ExperimentConfig c;
  c.preset = std::string(name);
  c.paper_scale = paper_scale;
  if (name == "r1" || name == "r2") {
    c.mode = Mode::Micro;
    c.population = name == "r1" ? PopulationKind::SetupR1 : PopulationKind::SetupR2;
    c.theta_lo = 0.0;
    c.theta_hi = 10.0;
    c.nu = 1.0;
    c.n_teams = paper_scale ? 200 : 50;
    c.steps = paper_scale ? 2000000 : 10000;
    c.realizations = paper_scale ? 50 : 10;
    c.snapshot_stride = c.steps / 100;
  } else if (name == "fig4-uniform") {
    c.mode = Mode::Macro;
    c.nu = 1.0;
    c.theta_lo = 0.0;
    c.theta_hi = 10.0;
    c.r_lo = 0.0;
    c.r_hi = 10.0;
    c.sigma_lo = 0.0;
    c.sigma_hi = 1.0;
    c.n_theta = paper_scale ? 200 : 40;
    c.n_r = paper_scale ? 200 : 40;
    c.n_sigma = paper_scale ? 20 : 10;
    c.macro_dt = paper_scale ? 1e-5 : 1e-3;
    c.t_end = paper_scale ? 5.0 : 1.0;
  } else if (name == "fig5-sweep") {
    c.mode = Mode::Macro2d;
    c.nu = 0.5;
    c.sweep = {0.0, 1.0};
    c.theta_lo = 4.0;
    c.theta_hi = 10.0;
    c.n_teams = paper_scale ? 500 : 100;
    c.steps = paper_scale ? 1000000 : 10000;
    c.realizations = paper_scale ? 50 : 20;
    c.snapshot_stride = c.steps / 100;
    // r cells centered on the initial rating 7
    c.n_theta = paper_scale ? 120 : 60;
    c.n_r = paper_scale ? 121 : 61;
    const double dr = 6.0 / (c.n_r - 1);
    c.r_lo = 4.0 - 0.5 * dr;
    c.r_hi = 10.0 + 0.5 * dr;
    c.macro_dt = paper_scale ? 1e-5 : 1e-2;
  } else if (name == "fig7-nu-sweep") {
    c.mode = Mode::Micro;
    c.sigma = 2.0;
    c.sweep = {1.0, 0.1, 0.01};
    c.theta_lo = 4.0;
    c.theta_hi = 10.0;
    c.n_teams = paper_scale ? 500 : 100;
    c.steps = paper_scale ? 1000000 : 100000;
    c.realizations = 50;
    c.snapshot_stride = c.steps / 100;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->set(cfg, value);
  }
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunReport run_experiment(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.mode == Mode::Check) return run_check(cfg);
  if (cfg.mode == Mode::Analyze) return run_analyze(cfg, out);
  if (!cfg.preset.empty()) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
      throw ConfigError("unknown preset '" + cfg.preset + "'");
    }
  }
  prepare_out_dir(out);
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  Writer w(out, report);

  if (cfg.preset == "fig5-sweep") {
    run_fig5(cfg, w, report);
  } else if (cfg.preset == "fig7-nu-sweep") {
    run_fig7(cfg, w, report);
  } else {
    switch (cfg.mode) {
      case Mode::Micro:
        run_micro_mode(cfg, w, report);
        break;
      case Mode::Macro:
        run_macro_mode(cfg, w, report);
        break;
      case Mode::Macro2d:
        run_macro2d_mode(cfg, w, report);
        break;
      default:
        break;
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(w.file("config.txt"), to_config_text(cfg));
  write_text(w.file("verdict.txt"), verdict_text(report));

  nlohmann::json manifest;
  manifest["code_version"] = kCodeVersion;
  manifest["seed"] = cfg.seed;
  manifest["preset"] = cfg.preset;
  manifest["mode"] = to_string(cfg.mode);
  manifest["paper_scale"] = cfg.paper_scale;
  manifest["wall_time_s"] = wall;
  manifest["scale_factors_to_paper"] = scale_factors(cfg);
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& f : fields()) conf[f.key] = f.get(cfg);
  manifest["config"] = conf;
  manifest["files"] = report.files;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  manifest["checks"] = checks;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

RunReport run_check(const ExperimentConfig& cfg) {
  RunReport report;
  const auto b = RatingFunction::tanh(cfg.nu);
  if (!(cfg.z_lo < cfg.z_hi)) throw ConfigError("check: need z_lo < z_hi");
  const auto res = check_b_prime_monotone(b, cfg.sigma, cfg.z_lo, cfg.z_hi);
  std::string detail = "min g' = " + fmt(res.min_slope) + " at z = " + fmt(res.argmin);
  if (res.fails_at) detail += "; first violation at z = " + fmt(*res.fails_at);
  report.checks.push_back(check("(B') b + sigma^2 b'' increasing", res.holds, detail));
  return report;
}

RunReport run_analyze(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.scatter_file.empty() && cfg.moments_file.empty() && cfg.snapshot_file.empty()) {
    throw ConfigError("analyze: give at least one of scatter_file, moments_file, snapshot_file");
  }
  prepare_out_dir(out);
  RunReport report;
  Writer w(out, report);
  std::vector<std::pair<std::string, double>> metrics;
  const auto read_or_config_error = [](auto&& fn) {
    try {
      return fn();
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
  };

  std::vector<analysis::ScatterPoint> points;
  if (!cfg.scatter_file.empty()) {
    const auto rows = read_or_config_error([&] { return io::read_scatter(cfg.scatter_file); });
    points = analysis::to_points(rows);
    metrics.emplace_back("regression_slope", analysis::regression_slope(points));
    metrics.emplace_back("compression_metric", analysis::compression_metric(points));
  }
  if (!cfg.moments_file.empty()) {
    const auto moments = read_or_config_error([&] { return io::read_moments(cfg.moments_file); });
    if (moments.empty()) throw ConfigError("analyze: empty moments file");
    double drift = 0.0;
    for (const auto& m : moments) drift = std::max(drift, std::abs(m.mass - moments.front().mass));
    metrics.emplace_back("mass_drift", drift);
    report.checks.push_back(second_moment_check(moments, ""));
    if (moments.size() >= 3 && moments.front().energy > 0.0) {
      const auto series = analysis::energy_series(moments);
      const auto b = RatingFunction::tanh(cfg.nu);
      const analysis::Support support{cfg.theta_lo, cfg.theta_hi, cfg.r_lo, cfg.r_hi};
      const auto v = analysis::check_energy_decay(series, b, cfg.kernel, support, cfg.sigma);
      metrics.emplace_back("fitted_rate", v.fitted_rate);
      metrics.emplace_back("bound_rate", v.bound_rate);
      report.notes.push_back("energy decay: " + v.message);
      if (v.assumption_holds) {
        report.checks.push_back(check("energy_monotone", v.monotone, v.message));
        report.checks.push_back(check("energy_bound", v.bound_satisfied, "worst E / bound = " + fmt(v.worst_bound_ratio)));
      }
    }
  }
  if (!cfg.snapshot_file.empty()) {
    const auto f = read_or_config_error([&] { return io::read_snapshot(cfg.snapshot_file); });
    metrics.emplace_back("mass", f.mass());
    if (!f.has_sigma()) metrics.emplace_back("relative_energy", analysis::relative_energy(f));
    if (!points.empty()) {
      const double dist = analysis::micro_macro_distance(points, f.has_sigma() ? macro::reduce_to_2d(f, 0.0).f : f);
      metrics.emplace_back("micro_macro_distance", dist);
    }
  }

  std::ostringstream csv;
  csv << "metric,value\n";
  for (const auto& [k, v] : metrics) {
    csv << k << ',' << num(v) << '\n';
    report.notes.push_back(k + " = " + fmt(v));
  }
  write_text(w.file("report.csv"), csv.str());
  write_text(w.file("verdict.txt"), verdict_text(report));
  return report;
}

}  // namespace elo::experiment
