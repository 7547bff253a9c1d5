// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "elo/analysis.hpp"
#include "elo/experiment.hpp"
#include "elo/macro.hpp"
#include "elo/micro.hpp"
#include "elo/model.hpp"

using namespace elo;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---------------------------------------------------------------- 1
Outcome conservation() {
  // micro: N = 50, 4000 steps x 25 matches = 1e5 matches, checked after every step
  const auto pop = micro::build_setup_r1(50, 3);
  micro::MicroConfig mc;
  mc.n_steps = 4000;
  mc.realizations = 1;
  mc.snapshot_stride = 1;
  mc.seed = 3;
  const auto res = micro::run_micro(pop, mc);
  double sum0 = 0.0;
  for (double r : pop.ratings()) sum0 += r;
  double micro_drift = 0.0;
  for (const auto& rec : res.records) {
    double s = 0.0;
    for (const auto& t : rec.teams) s += t.rating;
    micro_drift = std::max(micro_drift, std::abs(s - sum0));
  }

  // macro: 40 x 40 (theta, r) with 4 sigma cells, 1e4 steps at fixed dt
  const auto f0 = macro::uniform_density(
      macro::DensityGrid(macro::Axis{0, 10, 40}, macro::Axis{0, 1, 4}, macro::Axis{0, 10, 40}));
  macro::MacroConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 10.0;
  cfg.adaptive_dt = false;
  const auto mr = macro::run_macro(f0, cfg);
  const auto& m0 = mr.moments.front();
  double mass = 0, th1 = 0, th2 = 0, sg2 = 0;
  const auto rel = [](double x, double x0) { return std::abs(x - x0) / std::max(std::abs(x0), 1.0); };
  for (const auto& m : mr.moments) {
    mass = std::max(mass, std::abs(m.mass - m0.mass) / m0.mass);
    th1 = std::max(th1, rel(m.m1_theta, m0.m1_theta));
    th2 = std::max(th2, rel(m.m2_theta, m0.m2_theta));
    sg2 = std::max(sg2, rel(m.m2_sigma, m0.m2_sigma));
  }
  const bool ok = res.matches_played == 100000 && micro_drift <= 1e-9 && mr.steps == 10000 && mass <= 1e-9 &&
                  th1 <= 1e-12 && th2 <= 1e-12 && sg2 <= 1e-12;
  return {ok, "micro sum drift " + fmt("%.3g", micro_drift) + " over " + std::to_string(res.matches_played) +
                  " matches; macro " + std::to_string(mr.steps) + " steps: mass " + fmt("%.3g", mass) +
                  ", m1_theta " + fmt("%.3g", th1) + ", m2_theta " + fmt("%.3g", th2) + ", m2_sigma " +
                  fmt("%.3g", sg2)};
}

// ---------------------------------------------------------------- 2
Outcome second_moment() {
  const auto p = experiment::preset_config("fig4-uniform");
  const auto f0 = macro::uniform_density(macro::DensityGrid(macro::Axis{p.theta_lo, p.theta_hi, p.n_theta},
                                                            macro::Axis{p.sigma_lo, p.sigma_hi, p.n_sigma},
                                                            macro::Axis{p.r_lo, p.r_hi, p.n_r}));
  macro::MacroConfig cfg;
  cfg.dt = p.macro_dt;
  cfg.t_end = p.t_end;
  cfg.nu = p.nu;
  const auto res = macro::run_macro(f0, cfg);
  int violations = 0;
  for (std::size_t k = 1; k < res.moments.size(); ++k)
    if (res.moments[k].m2_r_centered > res.moments[k - 1].m2_r_centered + 1e-12) ++violations;
  const bool ok = violations == 0 && res.snapshots.back().t == cfg.t_end;
  return {ok, std::to_string(p.n_theta) + "x" + std::to_string(p.n_r) + "x" + std::to_string(p.n_sigma) + " grid, " +
                  std::to_string(res.steps) + " steps to t = " + fmt("%g", res.snapshots.back().t) + ", " +
                  std::to_string(violations) + " increases of centered m2_r (" +
                  fmt("%.6g", res.moments.front().m2_r_centered) + " -> " +
                  fmt("%.6g", res.moments.back().m2_r_centered) + ")"};
}

// ---------------------------------------------------------------- 3
Outcome energy_decay() {
  const double nu = 0.1, sigma = 0.5;
  const auto f0 = macro::uniform_density(macro::DensityGrid(macro::Axis{4, 10, 60}, macro::Axis{4, 10, 60}));
  macro::MacroConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.nu = nu;
  cfg.sigma_const = sigma;
  const auto res = macro::run_macro(f0, cfg);
  const auto series = analysis::energy_series(res.moments);
  const auto v = analysis::check_energy_decay(series, RatingFunction::tanh(nu), InteractionKernel::all_play_all(),
                                              {4, 10, 4, 10}, sigma, 0.05);
  const bool ok = v.assumption_holds && v.monotone && v.bound_satisfied;
  return {ok, std::string("(B') ") + (v.assumption_holds ? "holds" : "fails") + ", energy " +
                  (v.monotone ? "monotone" : "NOT monotone") + ", E(0) = " + fmt("%.5g", series.samples.front().energy) +
                  ", E(2) = " + fmt("%.5g", series.samples.back().energy) + ", fitted rate " +
                  fmt("%.4g", v.fitted_rate) + " vs bound rate " + fmt("%.4g", v.bound_rate) +
                  ", worst E/bound " + fmt("%.4f", v.worst_bound_ratio)};
}

// ---------------------------------------------------------------- 4, 5
struct NuRun {
  double nu;
  std::vector<analysis::ScatterPoint> points;
  std::vector<std::pair<double, double>> slopes;
};

std::vector<NuRun> nu_runs;

void run_nu_sweep() {
  const auto thetas = micro::uniform_thetas(100, 4, 10, 7);
  for (double nu : {1.0, 0.1, 0.01}) {
    micro::MicroConfig cfg;
    cfg.nu = nu;
    cfg.n_steps = 100000;
    cfg.realizations = 50;
    cfg.snapshot_stride = 1000;
    cfg.lineup_mode = micro::LineupMode::GaussianDraw;
    cfg.seed = 7;
    const auto res = micro::run_micro_gaussian(thetas, 2.0, 7.0, cfg);
    NuRun run{nu, analysis::to_points(res.scatter), {}};
    for (const auto& snap : micro::realization_means(res, 100)) {
      std::vector<analysis::ScatterPoint> pts(100);
      for (int i = 0; i < 100; ++i) pts[i] = {thetas[i], snap.mean_rating[i]};
      run.slopes.emplace_back(snap.time, analysis::regression_slope(pts));
    }
    nu_runs.push_back(std::move(run));
  }
}

Outcome nu_phenomenology() {
  run_nu_sweep();
  const double s1 = analysis::regression_slope(nu_runs[0].points);
  const double s01 = analysis::regression_slope(nu_runs[1].points);
  const auto c01 = analysis::convergence_time(nu_runs[1].slopes, 0.9);
  const auto c001 = analysis::convergence_time(nu_runs[2].slopes, 0.9);
  const bool ok = s1 <= 0.3 && s01 >= 0.7 && s01 <= 1.2 && c01 && c001 && *c001 > *c01;
  return {ok, "slope(nu=1) = " + fmt("%.4f", s1) + ", slope(nu=0.1) = " + fmt("%.4f", s01) +
                  ", slope(nu=0.01) = " + fmt("%.4f", analysis::regression_slope(nu_runs[2].points)) +
                  "; convergence time nu=0.1: " + (c01 ? fmt("%g", *c01) : "none") +
                  ", nu=0.01: " + (c001 ? fmt("%g", *c001) : "none")};
}

Outcome compression() {
  if (nu_runs.empty()) run_nu_sweep();
  const auto& pts = nu_runs[0].points;
  double mean = 0.0;
  for (const auto& p : pts) mean += p.rating;
  mean /= static_cast<double>(pts.size());
  const double cm = analysis::compression_metric(pts);
  const bool ok = mean >= 6.5 && mean <= 7.5 && cm < 0.0;
  return {ok, "nu = 1, sigma = 2: mean terminal rating " + fmt("%.6f", mean) + ", compression metric " +
                  fmt("%.4f", cm)};
}

// ---------------------------------------------------------------- 6
Outcome micro_macro() {
  const auto dir = std::filesystem::temp_directory_path() / "eloteams_acceptance_fig5";
  std::filesystem::remove_all(dir);
  const auto cfg = experiment::preset_config("fig5-sweep");
  const auto rep = experiment::run_experiment(cfg, dir);
  std::string detail;
  bool ok = true;
  int seen = 0;
  for (const auto& c : rep.checks) {
    if (c.name.rfind("micro_macro_distance", 0) != 0) continue;
    ++seen;
    ok = ok && c.passed;
    detail += (detail.empty() ? "" : "; ") + c.name.substr(21) + ": " + c.detail;
  }
  std::filesystem::remove_all(dir);
  return {ok && seen == 2, "nu = 0.5, " + detail};
}

// ---------------------------------------------------------------- 7
std::vector<double> subset_sums(const std::vector<double>& rho, int m) {
  std::vector<double> out;
  const int n = static_cast<int>(rho.size());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != m) continue;
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) s += rho[k];
    out.push_back(s);
  }
  return out;
}

double oracle_expected(const std::vector<double>& a, int ma, const std::vector<double>& c, int mc,
                       const RatingFunction& b) {
  const auto xs = subset_sums(a, ma);
  const auto ys = subset_sums(c, mc);
  double acc = 0.0;
  for (double x : xs)
    for (double y : ys) acc += b(x - y);
  return acc / (static_cast<double>(xs.size()) * ys.size());
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  const auto b = RatingFunction::tanh(1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int ma = size(rng), mc = size(rng);
    std::vector<double> a(ma), c(mc);
    for (double& x : a) x = u(rng);
    for (double& x : c) x = u(rng);
    const int la = std::uniform_int_distribution<int>(1, ma)(rng);
    const int lc = std::uniform_int_distribution<int>(1, mc)(rng);
    const double got = exact_expected_outcome(TeamRoster(a, la), TeamRoster(c, lc), b);
    worst = std::max(worst, std::abs(got - oracle_expected(a, la, c, lc, b)));
  }

  // Taylor error under shrinking player deviations; deviations are taken
  // about the roster mean so theta stays fixed while they are scaled
  std::uniform_real_distribution<double> dev(-0.1, 0.1);
  std::uniform_real_distribution<double> base(0.0, 0.5);
  double worst_ratio = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int ma = std::uniform_int_distribution<int>(2, 6)(rng);
    const int mc = std::uniform_int_distribution<int>(2, 6)(rng);
    const int la = std::uniform_int_distribution<int>(1, ma - 1)(rng);
    const int lc = std::uniform_int_distribution<int>(1, mc - 1)(rng);
    const double ca = base(rng), cc = base(rng);
    std::vector<double> da(ma), dc(mc);
    for (double& x : da) x = dev(rng);
    for (double& x : dc) x = dev(rng);
    const auto center = [](std::vector<double>& d) {
      const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
      for (double& x : d) x -= mean;
    };
    center(da);
    center(dc);
    double prev = -1.0;
    for (double eps : {1.0, 0.5, 0.25}) {
      std::vector<double> a(ma), c(mc);
      for (int q = 0; q < ma; ++q) a[q] = ca + eps * da[q];
      for (int q = 0; q < mc; ++q) c[q] = cc + eps * dc[q];
      const TeamRoster ra(a, la), rc(c, lc);
      const double err = std::abs(oracle_expected(a, la, c, lc, b) -
                                  taylor_expected_outcome(team_state(ra), team_state(rc), b));
      if (prev >= 0.0) worst_ratio = std::max(worst_ratio, err / prev);
      prev = err;
    }
  }
  const bool ok = worst <= 1e-12 && worst_ratio <= 0.5;
  return {ok, "20 rosters: max |exact - oracle| = " + fmt("%.3g", worst) +
                  "; 10 instances: worst Taylor error ratio per halving = " + fmt("%.4f", worst_ratio)};
}

// ---------------------------------------------------------------- 8
Outcome scheme_validation() {
  // compactly supported, so neither boundary is touched
  const auto bump = [](double x) {
    const double y = (x - 0.3) / 0.2;
    return std::abs(y) < 1.0 ? std::pow(1.0 - y * y, 4) : 0.0;
  };
  std::vector<double> errors;
  for (int n : {100, 200, 400, 800}) {
    macro::DensityGrid f(macro::Axis{0, 1, 1}, macro::Axis{0, 1, n});
    for (int j = 0; j < n; ++j) f.at(0, j) = bump(f.r().center(j));
    const double dt = 0.4 / n;
    const auto a = macro::VelocityField::constant(f, 1.0);
    const int steps = static_cast<int>(std::lround(0.3 / dt));
    for (int s = 0; s < steps; ++s) f = macro::godunov_step(f, a, dt);
    double err = 0.0;
    for (int j = 0; j < n; ++j) err += std::abs(f.at(0, j) - bump(f.r().center(j) - steps * dt)) / n;
    errors.push_back(err);
  }
  double min_order = 1e300;
  std::string orders;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double p = std::log2(errors[k - 1] / errors[k]);
    min_order = std::min(min_order, p);
    orders += (k > 1 ? ", " : "") + fmt("%.3f", p);
  }

  macro::DensityGrid diag(macro::Axis{4, 10, 60}, macro::Axis{4, 10, 60});
  for (int l = 0; l < 60; ++l) diag.at(l, l) = 1.0;
  diag.normalize();
  macro::MacroConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  const auto res = macro::run_macro(diag, cfg);
  const double drift = macro::l1_distance(res.snapshots.back().f, diag);
  const bool ok = min_order >= 0.8 && drift <= 1e-3;
  return {ok, "L1 orders over 3 refinements: " + orders + "; diagonal L1 drift over t = 1: " + fmt("%.3g", drift)};
}

}  // namespace

int main() {
  report(1, "conservation", conservation);
  report(2, "second-moment decay", second_moment);
  report(3, "energy decay bound", energy_decay);
  report(4, "nu phenomenology", nu_phenomenology);
  report(5, "compression", compression);
  report(6, "micro-macro agreement", micro_macro);
  report(7, "oracle equivalence", oracle_equivalence);
  report(8, "scheme validation", scheme_validation);
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
