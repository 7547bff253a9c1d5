#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elo/grid.hpp"
#include "elo/micro.hpp"
#include "elo/moments.hpp"
#include "elo/rating_function.hpp"

namespace elo::analysis {

/// integral of (r - theta)^2 f over a 2-D grid. Throws UsageError on 3-D grids.
double relative_energy(const macro::DensityGrid& f);

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
};

struct EnergySeries {
  std::vector<EnergySample> samples;
  double fitted_rate = 0.0;
  double theorem_rate = 0.0;
};

/// Energy series of a macro run (2-D moments only).
EnergySeries energy_series(std::span<const MomentReport> moments);

/// Rectangle in (theta, r) containing the support of the density.
struct Support {
  double theta_lo = 0.0;
  double theta_hi = 1.0;
  double r_lo = 0.0;
  double r_hi = 1.0;
};

struct DecayVerdict {
  bool assumption_holds = false;  ///< b + sigma^2 b'' increasing on the gap interval
  bool monotone = false;
  double fitted_rate = 0.0;       ///< -slope of the least-squares fit of log E
  double bound_rate = 0.0;        ///< 2 w_min (Lmin + sigma^2 L2min)
  bool bound_satisfied = false;
  double worst_bound_ratio = 0.0; ///< max over samples of E(t) / (E(0) exp(-bound_rate t))
  std::string message;
};

/// Least-squares decay rate of log E over samples with E > cutoff * E(0).
double fit_decay_rate(std::span<const EnergySample> samples, double cutoff = 1e-8);

/// Compares an energy series against E(0) exp(-2 w_min (Lmin + sigma^2 L2min) t),
/// the constants taken as infima over the gap interval of the support.
/// `tolerance` is the relative slack on the bound; `monotone_slack` the
/// absolute slack allowed on successive increases.
DecayVerdict check_energy_decay(const EnergySeries& series, const RatingFunction& b,
                                const InteractionKernel& w, const Support& support, double sigma,
                                double tolerance = 0.05, double monotone_slack = 1e-12);

struct ScatterPoint {
  double theta = 0.0;
  double rating = 0.0;
};

std::vector<ScatterPoint> to_points(std::span<const micro::ScatterRow> rows);

/// OLS slope of rating on theta. Throws DomainError for fewer than two distinct theta.
double regression_slope(std::span<const ScatterPoint> scatter);

/// Mean of sign(theta - mean theta) (R - theta); negative means ratings are
/// pulled toward the center.
double compression_metric(std::span<const ScatterPoint> scatter);

/// sup over theta cells of |mean micro rating - E_macro[r | theta]|, skipping
/// cells that are empty in either. Throws DomainError if no cell is shared.
double micro_macro_distance(std::span<const ScatterPoint> micro_scatter,
                            const macro::DensityGrid& macro_grid);

/// Macro time elapsed per micro step: each step proposes K pairs out of
/// N (N - 1) / 2 and every accepted match moves a rating by gamma.
double macro_time_per_micro_step(const micro::MicroConfig& cfg, int n_teams);

/// 2-D density whose theta marginal is the binned micro sample and whose
/// ratings sit in the r-cells of the given ratings.
macro::DensityGrid density_from_sample(std::span<const ScatterPoint> sample, macro::Axis theta,
                                       macro::Axis r);

/// First time at which `series` reaches fraction * (terminal value).
std::optional<double> convergence_time(std::span<const std::pair<double, double>> series,
                                       double fraction = 0.9);

}  // namespace elo::analysis
