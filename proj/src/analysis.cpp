#include "elo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elo/errors.hpp"
#include "elo/model.hpp"

namespace elo::analysis {

double relative_energy(const macro::DensityGrid& f) {
  if (f.has_sigma()) throw UsageError("relative_energy: reduce the 3-D grid to (theta, r) first");
  double e = 0.0;
  for (int l = 0; l < f.n_theta(); ++l) {
    const double x = f.theta().center(l);
    for (int j = 0; j < f.n_r(); ++j) {
      const double d = f.r().center(j) - x;
      e += d * d * f.at(l, j);
    }
  }
  return e * f.cell_volume();
}

EnergySeries energy_series(std::span<const MomentReport> moments) {
  EnergySeries s;
  s.samples.reserve(moments.size());
  for (const auto& m : moments) s.samples.push_back({m.t, m.energy});
  if (s.samples.size() >= 2) s.fitted_rate = fit_decay_rate(s.samples);
  return s;
}

double fit_decay_rate(std::span<const EnergySample> samples, double cutoff) {
  if (samples.empty()) throw DomainError("fit_decay_rate: no samples");
  const double e0 = samples.front().energy;
  double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const auto& s : samples) {
    if (!(s.energy > cutoff * e0) || !(s.energy > 0.0)) continue;
    const double y = std::log(s.energy);
    n += 1.0;
    st += s.t;
    sy += y;
    stt += s.t * s.t;
    sty += s.t * y;
  }
  const double den = n * stt - st * st;
  if (n < 2.0 || den <= 0.0) throw DomainError("fit_decay_rate: need two samples at distinct times");
  return -(n * sty - st * sy) / den;
}

DecayVerdict check_energy_decay(const EnergySeries& series, const RatingFunction& b,
                                const InteractionKernel& w, const Support& support, double sigma,
                                double tolerance, double monotone_slack) {
  if (series.samples.size() < 3) throw DomainError("check_energy_decay: need at least three samples");
  DecayVerdict v;
  const double gap_theta = support.theta_hi - support.theta_lo;
  const double gap_r = support.r_hi - support.r_lo;
  const double gap = std::max(gap_theta, gap_r);

  const auto mono = check_b_prime_monotone(b, sigma, -gap_theta, gap_theta);
  v.assumption_holds = mono.holds;

  v.monotone = true;
  for (std::size_t k = 1; k < series.samples.size(); ++k) {
    if (series.samples[k].energy > series.samples[k - 1].energy + monotone_slack) v.monotone = false;
  }
  v.fitted_rate = fit_decay_rate(series.samples);

  const auto slopes = lipschitz_estimates(b, -gap, gap);
  const double w_min = w.min_over(gap_r);
  v.bound_rate = 2.0 * w_min * (slopes.min_slope + sigma * sigma * slopes.min_slope2);

  const double e0 = series.samples.front().energy;
  v.bound_satisfied = true;
  for (const auto& s : series.samples) {
    const double bound = e0 * std::exp(-v.bound_rate * s.t);
    if (bound > 0.0) v.worst_bound_ratio = std::max(v.worst_bound_ratio, s.energy / bound);
    if (s.energy > bound * (1.0 + tolerance)) v.bound_satisfied = false;
  }

  std::ostringstream os;
  if (!v.assumption_holds) {
    v.bound_satisfied = false;
    os << "assumption violated; decay not guaranteed (b' + sigma^2 b''' = " << mono.min_slope
       << " at z = " << mono.argmin << ")";
  } else {
    os << (v.monotone ? "energy nonincreasing" : "energy increases") << "; fitted rate "
       << v.fitted_rate << " vs bound rate " << v.bound_rate << "; bound "
       << (v.bound_satisfied ? "satisfied" : "violated");
  }
  v.message = os.str();
  return v;
}

std::vector<ScatterPoint> to_points(std::span<const micro::ScatterRow> rows) {
  std::vector<ScatterPoint> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.theta, r.rating_mean});
  return out;
}

double regression_slope(std::span<const ScatterPoint> scatter) {
  if (scatter.size() < 2) throw DomainError("regression_slope: need at least two points");
  const double n = static_cast<double>(scatter.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : scatter) {
    mx += p.theta;
    my += p.rating;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : scatter) {
    sxx += (p.theta - mx) * (p.theta - mx);
    sxy += (p.theta - mx) * (p.rating - my);
  }
  if (!(sxx > 0.0)) throw DomainError("regression_slope: theta values are all equal");
  return sxy / sxx;
}

double compression_metric(std::span<const ScatterPoint> scatter) {
  if (scatter.empty()) throw DomainError("compression_metric: empty scatter");
  double mean_theta = 0.0;
  for (const auto& p : scatter) mean_theta += p.theta;
  mean_theta /= static_cast<double>(scatter.size());
  double acc = 0.0;
  for (const auto& p : scatter) {
    const double d = p.theta - mean_theta;
    const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    acc += sign * (p.rating - p.theta);
  }
  return acc / static_cast<double>(scatter.size());
}

double micro_macro_distance(std::span<const ScatterPoint> micro_scatter,
                            const macro::DensityGrid& macro_grid) {
  const auto& axis = macro_grid.theta();
  std::vector<double> sum(axis.n, 0.0);
  std::vector<int> count(axis.n, 0);
  for (const auto& p : micro_scatter) {
    const int l = axis.cell_of(p.theta);
    if (l < 0) continue;
    sum[l] += p.rating;
    ++count[l];
  }
  const auto cond = macro_grid.conditional_mean_r();
  double worst = -1.0;
  for (int l = 0; l < axis.n; ++l) {
    if (count[l] == 0 || std::isnan(cond[l])) continue;
    worst = std::max(worst, std::abs(sum[l] / count[l] - cond[l]));
  }
  if (worst < 0.0) throw DomainError("micro_macro_distance: no theta cell is populated in both");
  return worst;
}

double macro_time_per_micro_step(const micro::MicroConfig& cfg, int n_teams) {
  if (n_teams < 2) throw DomainError("macro_time_per_micro_step: need at least two teams");
  return 2.0 * cfg.matches_per_step * cfg.gamma / ((n_teams - 1) * cfg.kernel.max_value());
}

macro::DensityGrid density_from_sample(std::span<const ScatterPoint> sample, macro::Axis theta,
                                       macro::Axis r) {
  if (sample.empty()) throw DomainError("density_from_sample: empty sample");
  macro::DensityGrid f(theta, r);
  const double w = 1.0 / (static_cast<double>(sample.size()) * f.cell_volume());
  for (const auto& p : sample) {
    const int l = theta.cell_of(p.theta);
    const int j = r.cell_of(p.rating);
    if (l < 0 || j < 0) throw DomainError("density_from_sample: point outside the grid");
    f.at(l, j) += w;
  }
  return f;
}

std::optional<double> convergence_time(std::span<const std::pair<double, double>> series,
                                       double fraction) {
  if (series.empty()) return std::nullopt;
  const double target = fraction * series.back().second;
  for (const auto& [t, value] : series) {
    if (value >= target) return t;
  }
  return std::nullopt;
}

}  // namespace elo::analysis
