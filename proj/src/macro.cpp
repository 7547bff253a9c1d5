#include "elo/macro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "elo/errors.hpp"

namespace elo::macro {

namespace {

// Tables over cell-index offsets: entry [d + n - 1] holds the value for offset d.
std::vector<double> offset_table(int n, double spacing, const std::function<double(double)>& fn) {
  std::vector<double> t(2 * n - 1);
  for (int d = -(n - 1); d <= n - 1; ++d) t[d + n - 1] = fn(d * spacing);
  return t;
}

// dtheta-convolution: out(l, k) = sum_l' kernel[l - l'] in(l', k) * dtheta
void convolve_theta(const std::vector<double>& table, const std::vector<double>& in, int n_theta,
                    int n_r, double dtheta, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(n_theta) * n_r, 0.0);
  for (int l = 0; l < n_theta; ++l) {
    double* row = &out[static_cast<std::size_t>(l) * n_r];
    for (int lp = 0; lp < n_theta; ++lp) {
      const double c = table[l - lp + n_theta - 1] * dtheta;
      const double* src = &in[static_cast<std::size_t>(lp) * n_r];
      for (int k = 0; k < n_r; ++k) row[k] += c * src[k];
    }
  }
}

}  // namespace

VelocityField::VelocityField(int n_sigma, int n_theta, int n_r)
    : n_sigma_(n_sigma), n_theta_(n_theta), n_r_(n_r),
      values_(static_cast<std::size_t>(n_sigma) * n_theta * (n_r + 1), 0.0) {}

double VelocityField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

VelocityField VelocityField::constant(const DensityGrid& f, double speed) {
  VelocityField a(f.n_sigma(), f.n_theta(), f.n_r());
  for (int m = 0; m < f.n_sigma(); ++m)
    for (int l = 0; l < f.n_theta(); ++l)
      for (int j = 1; j < f.n_r(); ++j) a.at(m, l, j) = speed;
  return a;
}

VelocityField assemble_velocity(const DensityGrid& f, const RatingFunction& b,
                                const InteractionKernel& w, double sigma_const) {
  const int ns = f.n_sigma();
  const int nt = f.n_theta();
  const int nr = f.n_r();
  const double dth = f.theta().spacing();
  const double dr = f.r().spacing();
  const double ds = f.has_sigma() ? f.sigma().spacing() : 1.0;

  // Column densities integrated over sigma: F0 = int f dsigma, F2 = int sigma^2 f dsigma.
  std::vector<double> f0(static_cast<std::size_t>(nt) * nr, 0.0);
  std::vector<double> f2(static_cast<std::size_t>(nt) * nr, 0.0);
  for (int m = 0; m < ns; ++m) {
    const double s = f.has_sigma() ? f.sigma().center(m) : 0.0;
    for (int l = 0; l < nt; ++l)
      for (int k = 0; k < nr; ++k) {
        const double v = f.at(m, l, k) * ds;
        f0[static_cast<std::size_t>(l) * nr + k] += v;
        f2[static_cast<std::size_t>(l) * nr + k] += s * s * v;
      }
  }
  std::vector<double> g0(nr, 0.0);
  for (int l = 0; l < nt; ++l)
    for (int k = 0; k < nr; ++k) g0[k] += f0[static_cast<std::size_t>(l) * nr + k] * dth;

  const auto b_theta = offset_table(nt, dth, [&](double u) { return b(u); });
  const auto b2_theta = offset_table(nt, dth, [&](double u) { return b.deriv2(u); });

  // strength part of the kernel, per (theta_l, r'_k)
  std::vector<double> strength;  // sigma-independent part
  std::vector<double> curvature; // coefficient of sigma^2 / 2 (3-D only)
  if (f.has_sigma()) {
    std::vector<double> c0;
    std::vector<double> c2;
    convolve_theta(b_theta, f0, nt, nr, dth, strength);
    convolve_theta(b2_theta, f0, nt, nr, dth, c0);
    convolve_theta(b2_theta, f2, nt, nr, dth, c2);
    for (std::size_t q = 0; q < strength.size(); ++q) strength[q] += 0.5 * c2[q];
    curvature = std::move(c0);
  } else {
    std::vector<double> g_theta(b_theta.size());
    const double s2 = sigma_const * sigma_const;
    for (std::size_t q = 0; q < g_theta.size(); ++q) g_theta[q] = b_theta[q] + s2 * b2_theta[q];
    convolve_theta(g_theta, f0, nt, nr, dth, strength);
  }

  // interface j sits at offset (j - k - 1/2) dr from cell k; index d = j - k in [-(nr-1), nr]
  std::vector<double> w_tab(2 * nr);
  std::vector<double> bw_tab(2 * nr);
  for (int d = -(nr - 1); d <= nr; ++d) {
    const double x = (d - 0.5) * dr;
    w_tab[d + nr - 1] = w(x) * dr;
    bw_tab[d + nr - 1] = w(x) * b(x) * dr;
  }
  std::vector<double> rating_term(nr + 1, 0.0);
  for (int j = 1; j < nr; ++j)
    for (int k = 0; k < nr; ++k) rating_term[j] += bw_tab[j - k + nr - 1] * g0[k];

  VelocityField a(ns, nt, nr);
  std::vector<double> p(nr + 1);
  std::vector<double> q(nr + 1);
  for (int l = 0; l < nt; ++l) {
    const double* srow = &strength[static_cast<std::size_t>(l) * nr];
    const double* crow = curvature.empty() ? nullptr : &curvature[static_cast<std::size_t>(l) * nr];
    for (int j = 1; j < nr; ++j) {
      double ps = 0.0;
      double qs = 0.0;
      for (int k = 0; k < nr; ++k) {
        const double wk = w_tab[j - k + nr - 1];
        ps += wk * srow[k];
        if (crow) qs += wk * crow[k];
      }
      p[j] = ps - rating_term[j];
      q[j] = qs;
    }
    for (int m = 0; m < ns; ++m) {
      const double half_s2 = f.has_sigma() ? 0.5 * f.sigma().center(m) * f.sigma().center(m) : 0.0;
      for (int j = 1; j < nr; ++j) a.at(m, l, j) = p[j] + half_s2 * q[j];
    }
  }
  return a;
}

double drift_at(const DensityGrid& f, const RatingFunction& b, const InteractionKernel& w,
                double theta, double sigma, double r, double sigma_const) {
  const double vol = f.cell_volume();
  double a = 0.0;
  for (int m = 0; m < f.n_sigma(); ++m) {
    const double sp = f.has_sigma() ? f.sigma().center(m) : 0.0;
    for (int l = 0; l < f.n_theta(); ++l) {
      const double u = theta - f.theta().center(l);
      const double g = f.has_sigma() ? b(u) + 0.5 * b.deriv2(u) * (sigma * sigma + sp * sp)
                                     : b(u) + sigma_const * sigma_const * b.deriv2(u);
      for (int j = 0; j < f.n_r(); ++j) {
        const double v = f.at(m, l, j);
        if (v == 0.0) continue;
        const double x = r - f.r().center(j);
        a += w(x) * (g - b(x)) * v * vol;
      }
    }
  }
  return a;
}

double admissible_dt(const DensityGrid& f, const VelocityField& a) {
  double worst = 0.0;
  for (int m = 0; m < f.n_sigma(); ++m)
    for (int l = 0; l < f.n_theta(); ++l)
      for (int j = 0; j < f.n_r(); ++j) {
        const double out = std::max(a.at(m, l, j + 1), 0.0) + std::max(-a.at(m, l, j), 0.0);
        worst = std::max(worst, out);
      }
  if (worst == 0.0) return std::numeric_limits<double>::infinity();
  return f.r().spacing() / worst;
}

DensityGrid godunov_step(const DensityGrid& f, const VelocityField& a, double dt, double cfl_safety) {
  if (a.n_sigma() != f.n_sigma() || a.n_theta() != f.n_theta() || a.n_r() != f.n_r()) {
    throw UsageError("godunov_step: velocity field does not match the grid");
  }
  if (!(dt > 0.0)) throw DomainError("godunov_step: dt must be positive");
  const double dr = f.r().spacing();
  const double speed = a.max_abs();
  if (speed > 0.0 && dt * speed / dr > cfl_safety * (1.0 + 1e-12)) {
    throw CflError(speed, cfl_safety * dr / speed);
  }
  const int nr = f.n_r();
  const double lambda = dt / dr;
  DensityGrid out = f;
  std::vector<double> flux(nr + 1, 0.0);
  for (int m = 0; m < f.n_sigma(); ++m)
    for (int l = 0; l < f.n_theta(); ++l) {
      for (int j = 1; j < nr; ++j) {
        const double v = a.at(m, l, j);
        flux[j] = v * (v >= 0.0 ? f.at(m, l, j - 1) : f.at(m, l, j));
      }
      for (int j = 0; j < nr; ++j) out.at(m, l, j) = f.at(m, l, j) - lambda * (flux[j + 1] - flux[j]);
    }
  return out;
}

void MacroConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("macro: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("macro: t_end must be >= 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("macro: nu must be positive");
  if (!(sigma_const >= 0.0) || !std::isfinite(sigma_const)) throw ConfigError("macro: sigma must be >= 0");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("macro: cfl_safety must lie in (0, 1]");
  if (snapshot_stride < 0) throw ConfigError("macro: snapshot_stride must be >= 0");
  if (velocity_refresh < 1) throw ConfigError("macro: velocity_refresh must be >= 1");
}

MacroResult run_macro(const DensityGrid& f0, const MacroConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  if (std::abs(f0.mass() - 1.0) > 1e-9) throw ConfigError("macro: initial density must have mass 1");
  if (f0.min_value() < 0.0) throw ConfigError("macro: initial density must be nonnegative");

  const auto b = RatingFunction::tanh(cfg.nu);
  const double dr = f0.r().spacing();
  MacroResult res;
  res.moments.push_back(analysis::compute_moments(f0, 0.0));
  res.snapshots.push_back(Snapshot{0.0, f0});
  res.min_value = f0.min_value();
  res.min_dt = std::numeric_limits<double>::infinity();

  bool warned_dt = false;
  bool warned_boundary = false;
  auto check_boundary = [&](const DensityGrid& f, double t) {
    if (warned_boundary) return;
    double edge = 0.0;
    for (int m = 0; m < f.n_sigma(); ++m)
      for (int l = 0; l < f.n_theta(); ++l) edge += f.at(m, l, 0) + f.at(m, l, f.n_r() - 1);
    edge *= f.cell_volume();
    if (edge > 1e-6) {
      std::ostringstream os;
      os << "boundary r-cells carry mass " << edge << " at t = " << t << " (> 1e-6)";
      res.warnings.push_back(os.str());
      warned_boundary = true;
    }
  };
  check_boundary(f0, 0.0);

  DensityGrid f = f0;
  VelocityField a(f.n_sigma(), f.n_theta(), f.n_r());
  double t = 0.0;
  std::int64_t step = 0;
  const double t_tol = 1e-12 * std::max(1.0, cfg.t_end);
  while (cfg.t_end - t > t_tol) {
    if (step % cfg.velocity_refresh == 0) a = assemble_velocity(f, b, cfg.kernel, cfg.sigma_const);
    const double speed = a.max_abs();
    const double dt_cfl = speed > 0.0 ? cfg.cfl_safety * dr / speed : std::numeric_limits<double>::infinity();
    double dt = std::min(cfg.dt, cfg.t_end - t);
    if (dt > dt_cfl) {
      if (!cfg.adaptive_dt) throw CflError(speed, dt_cfl);
      if (!warned_dt) {
        std::ostringstream os;
        os << "dt clipped from " << cfg.dt << " to " << dt_cfl << " by the CFL condition at t = " << t;
        res.warnings.push_back(os.str());
        warned_dt = true;
      }
      dt = dt_cfl;
    }
    f = godunov_step(f, a, dt, cfg.cfl_safety);
    ++step;
    t = (cfg.t_end - (t + dt) <= t_tol) ? cfg.t_end : t + dt;
    res.min_dt = std::min(res.min_dt, dt);
    res.max_dt = std::max(res.max_dt, dt);

    for (double v : f.values()) {
      if (!std::isfinite(v)) throw NumericalError("macro: non-finite density at t = " + std::to_string(t));
    }
    res.min_value = std::min(res.min_value, f.min_value());
    res.moments.push_back(analysis::compute_moments(f, t));
    check_boundary(f, t);
    const bool on_stride = cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0;
    if (on_stride || t == cfg.t_end) res.snapshots.push_back(Snapshot{t, f});
    if (observer) observer(step, t, f);
  }
  res.steps = step;
  if (step == 0) res.min_dt = 0.0;
  return res;
}

ReducedProblem reduce_to_2d(const DensityGrid& f3d, double sigma_const) {
  if (!f3d.has_sigma()) throw UsageError("reduce_to_2d: grid has no sigma axis");
  if (!(sigma_const >= 0.0)) throw DomainError("reduce_to_2d: sigma_const must be >= 0");
  DensityGrid out(f3d.theta(), f3d.r());
  const double ds = f3d.sigma().spacing();
  for (int m = 0; m < f3d.n_sigma(); ++m)
    for (int l = 0; l < f3d.n_theta(); ++l)
      for (int j = 0; j < f3d.n_r(); ++j) out.at(l, j) += f3d.at(m, l, j) * ds;
  return ReducedProblem{std::move(out), sigma_const};
}

DensityGrid uniform_density(DensityGrid grid) {
  for (double& v : grid.values()) v = 1.0;
  grid.normalize();
  return grid;
}

}  // namespace elo::macro
