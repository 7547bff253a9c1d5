#include "elo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elo/errors.hpp"

namespace elo::macro {

namespace {

void check_axis(const Axis& a, const char* name) {
  if (a.n < 1 || !std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.lo < a.hi)) {
    throw ConfigError(std::string("grid: invalid ") + name + " axis");
  }
}

// Equal up to rounding, so grids rebuilt from written cell centers compare equal.
bool same_axis(const Axis& a, const Axis& b) {
  const double tol = 1e-9 * a.spacing();
  return a.n == b.n && std::abs(a.lo - b.lo) <= tol && std::abs(a.hi - b.hi) <= tol;
}

}  // namespace

int Axis::cell_of(double x) const {
  if (!(x >= lo && x <= hi)) return -1;
  const int i = static_cast<int>(std::floor((x - lo) / spacing()));
  return std::clamp(i, 0, n - 1);
}

DensityGrid::DensityGrid(Axis theta, Axis r) : theta_(theta), r_(r) {
  check_axis(theta_, "theta");
  check_axis(r_, "r");
  values_.assign(static_cast<std::size_t>(theta_.n) * r_.n, 0.0);
}

DensityGrid::DensityGrid(Axis theta, Axis sigma, Axis r) : theta_(theta), sigma_(sigma), r_(r) {
  check_axis(theta_, "theta");
  check_axis(*sigma_, "sigma");
  check_axis(r_, "r");
  values_.assign(static_cast<std::size_t>(theta_.n) * sigma_->n * r_.n, 0.0);
}

const Axis& DensityGrid::sigma() const {
  if (!sigma_) throw UsageError("grid: no sigma axis on a 2-D grid");
  return *sigma_;
}

double DensityGrid::cell_volume() const {
  double v = theta_.spacing() * r_.spacing();
  if (sigma_) v *= sigma_->spacing();
  return v;
}

double DensityGrid::mass() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * cell_volume();
}

void DensityGrid::normalize() {
  const double m = mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("grid: cannot normalize a density without positive mass");
  for (double& v : values_) v /= m;
}

double DensityGrid::min_value() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

std::vector<double> DensityGrid::theta_marginal() const {
  std::vector<double> out(theta_.n, 0.0);
  const double w = cell_volume() / theta_.spacing();
  for (int m = 0; m < n_sigma(); ++m)
    for (int l = 0; l < theta_.n; ++l)
      for (int j = 0; j < r_.n; ++j) out[l] += at(m, l, j) * w;
  return out;
}

std::vector<double> DensityGrid::r_marginal() const {
  std::vector<double> out(r_.n, 0.0);
  const double w = cell_volume() / r_.spacing();
  for (int m = 0; m < n_sigma(); ++m)
    for (int l = 0; l < theta_.n; ++l)
      for (int j = 0; j < r_.n; ++j) out[j] += at(m, l, j) * w;
  return out;
}

std::vector<double> DensityGrid::sigma_marginal() const {
  const Axis& s = sigma();
  std::vector<double> out(s.n, 0.0);
  const double w = cell_volume() / s.spacing();
  for (int m = 0; m < s.n; ++m)
    for (int l = 0; l < theta_.n; ++l)
      for (int j = 0; j < r_.n; ++j) out[m] += at(m, l, j) * w;
  return out;
}

std::vector<double> DensityGrid::conditional_mean_r() const {
  std::vector<double> out(theta_.n, std::numeric_limits<double>::quiet_NaN());
  for (int l = 0; l < theta_.n; ++l) {
    double mass = 0.0;
    double first = 0.0;
    for (int m = 0; m < n_sigma(); ++m)
      for (int j = 0; j < r_.n; ++j) {
        mass += at(m, l, j);
        first += r_.center(j) * at(m, l, j);
      }
    if (mass > 0.0) out[l] = first / mass;
  }
  return out;
}

double l1_distance(const DensityGrid& f, const DensityGrid& g) {
  if (!same_axis(f.theta(), g.theta()) || !same_axis(f.r(), g.r()) || f.has_sigma() != g.has_sigma() ||
      (f.has_sigma() && !same_axis(f.sigma(), g.sigma()))) {
    throw UsageError("l1_distance: grids differ in geometry");
  }
  double s = 0.0;
  const auto a = f.values();
  const auto b = g.values();
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * f.cell_volume();
}

}  // namespace elo::macro
