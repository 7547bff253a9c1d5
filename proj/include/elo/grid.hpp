#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace elo::macro {

/// Uniform cell-centered axis on [lo, hi] with n cells.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 1;

  double spacing() const { return (hi - lo) / n; }
  double center(int i) const { return lo + (i + 0.5) * spacing(); }
  /// Position of interface i (0..n); interface i separates cells i-1 and i.
  double interface(int i) const { return lo + i * spacing(); }
  /// Cell containing x, or -1 outside [lo, hi]. hi itself maps to the last cell.
  int cell_of(double x) const;
};

/// Team density f on (theta, r) or (theta, sigma, r) cells.
///
/// Values are point values of f per cell; mass is value times cell volume.
/// Storage is r-fastest: index ((m * n_theta) + l) * n_r + j.
class DensityGrid {
 public:
  DensityGrid(Axis theta, Axis r);
  DensityGrid(Axis theta, Axis sigma, Axis r);

  bool has_sigma() const noexcept { return sigma_.has_value(); }
  const Axis& theta() const noexcept { return theta_; }
  const Axis& r() const noexcept { return r_; }
  /// Throws UsageError on a 2-D grid.
  const Axis& sigma() const;
  int n_sigma() const noexcept { return sigma_ ? sigma_->n : 1; }
  int n_theta() const noexcept { return theta_.n; }
  int n_r() const noexcept { return r_.n; }

  double cell_volume() const;

  std::size_t index(int m, int l, int j) const {
    return (static_cast<std::size_t>(m) * theta_.n + l) * r_.n + j;
  }
  double& at(int l, int j) { return values_[index(0, l, j)]; }
  double at(int l, int j) const { return values_[index(0, l, j)]; }
  double& at(int m, int l, int j) { return values_[index(m, l, j)]; }
  double at(int m, int l, int j) const { return values_[index(m, l, j)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double mass() const;
  /// Scales values so that mass() == 1. Throws DomainError if mass <= 0.
  void normalize();
  double min_value() const;

  /// Sum of f over sigma and r times the other cell widths: density in theta.
  std::vector<double> theta_marginal() const;
  /// Density in r (integrated over theta and sigma).
  std::vector<double> r_marginal() const;
  /// Density in sigma; requires a 3-D grid.
  std::vector<double> sigma_marginal() const;
  /// E[r | theta_l] per theta cell; NaN where the column carries no mass.
  std::vector<double> conditional_mean_r() const;

 private:
  Axis theta_;
  std::optional<Axis> sigma_;
  Axis r_;
  std::vector<double> values_;
};

/// L1 distance sum |f - g| * cell volume. Grids must share geometry.
double l1_distance(const DensityGrid& f, const DensityGrid& g);

}  // namespace elo::macro
