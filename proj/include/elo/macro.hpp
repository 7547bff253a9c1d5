#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "elo/grid.hpp"
#include "elo/moments.hpp"
#include "elo/rating_function.hpp"

namespace elo::macro {

/// Rating velocity at the r-interfaces of every (sigma, theta) column.
/// Interfaces 0 and n_r are domain boundaries and carry zero flux.
class VelocityField {
 public:
  VelocityField(int n_sigma, int n_theta, int n_r);

  double& at(int m, int l, int j) { return values_[index(m, l, j)]; }
  double at(int m, int l, int j) const { return values_[index(m, l, j)]; }
  double max_abs() const;
  int n_sigma() const noexcept { return n_sigma_; }
  int n_theta() const noexcept { return n_theta_; }
  int n_r() const noexcept { return n_r_; }

  /// Velocity field that is constant on every interior interface.
  static VelocityField constant(const DensityGrid& f, double speed);

 private:
  std::size_t index(int m, int l, int j) const {
    return (static_cast<std::size_t>(m) * n_theta_ + l) * (n_r_ + 1) + j;
  }

  int n_sigma_;
  int n_theta_;
  int n_r_;
  std::vector<double> values_;
};

/// Nonlocal drift a[f] evaluated at each interior r-interface by midpoint
/// quadrature over all cells of f.
///
/// 3-D grids use b(dtheta) + b''(dtheta) (sigma^2 + sigma'^2) / 2 - b(dr);
/// 2-D grids use the reduced kernel b(dtheta) + sigma_const^2 b''(dtheta) - b(dr).
VelocityField assemble_velocity(const DensityGrid& f, const RatingFunction& b,
                                const InteractionKernel& w, double sigma_const = 0.0);

/// Largest dt for which every cell keeps a nonnegative value under the upwind
/// update with the given velocities (outflow through both faces counted).
double admissible_dt(const DensityGrid& f, const VelocityField& a);

/// One explicit upwind (Godunov) step in r with zero flux at the r-boundaries.
/// Throws CflError if dt * max|a| / dr > cfl_safety.
DensityGrid godunov_step(const DensityGrid& f, const VelocityField& a, double dt,
                         double cfl_safety = 1.0);

struct MacroConfig {
  double dt = 1e-5;
  double t_end = 1.0;
  double nu = 1.0;
  double sigma_const = 0.0;
  InteractionKernel kernel = InteractionKernel::all_play_all();
  double cfl_safety = 0.5;
  /// Keep a density snapshot every this many steps (t = 0 and t_end always kept).
  std::int64_t snapshot_stride = 0;
  /// Reassemble a[f] every this many steps.
  int velocity_refresh = 1;
  /// Clip dt to the CFL limit instead of failing.
  bool adaptive_dt = true;

  void validate() const;
};

struct Snapshot {
  double t = 0.0;
  DensityGrid f;
};

struct MacroResult {
  std::vector<analysis::MomentReport> moments;  ///< t = 0 and after every step
  std::vector<Snapshot> snapshots;
  std::vector<std::string> warnings;
  std::int64_t steps = 0;
  double min_dt = 0.0;
  double max_dt = 0.0;
  double min_value = 0.0;  ///< smallest cell value seen over the run
};

/// Called after each accepted step with the step index, time and new density.
using StepObserver = std::function<void(std::int64_t, double, const DensityGrid&)>;

/// Advances f0 from 0 to t_end. Throws ConfigError on invalid input,
/// CflError if adaptive_dt is off and dt is too large, NumericalError on NaN.
MacroResult run_macro(const DensityGrid& f0, const MacroConfig& cfg,
                      const StepObserver& observer = {});

/// Pointwise a[f](theta, sigma, r) by direct quadrature over all cells.
/// On 2-D grids `sigma` is ignored and sigma_const is used.
double drift_at(const DensityGrid& f, const RatingFunction& b, const InteractionKernel& w,
                double theta, double sigma, double r, double sigma_const = 0.0);

/// A (theta, r) density together with the constant sigma of its kernel.
struct ReducedProblem {
  DensityGrid f;
  double sigma_const = 0.0;
};

/// Integrates out the sigma axis of a 3-D density and attaches sigma_const
/// for the reduced kernel. Mass is preserved.
ReducedProblem reduce_to_2d(const DensityGrid& f3d, double sigma_const);

/// Normalized density that is constant on the whole grid.
DensityGrid uniform_density(DensityGrid grid);

}  // namespace elo::macro
