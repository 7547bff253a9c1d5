#pragma once

#include <span>

#include "elo/grid.hpp"

namespace elo::analysis {

/// Moments of a team density at one time. Raw moments are integrals of f
/// (not divided by mass); centered ones are taken about the mean.
struct MomentReport {
  double t = 0.0;
  double mass = 0.0;
  double m1_r = 0.0;
  double m2_r = 0.0;
  double m1_theta = 0.0;
  double m2_theta = 0.0;
  double m2_sigma = 0.0;  ///< integral of sigma^2 f
  double m2_r_centered = 0.0;
  double m2_theta_centered = 0.0;
  double energy = 0.0;    ///< integral of (r - theta)^2 f
};

/// Midpoint-rule moments of a grid density.
MomentReport compute_moments(const macro::DensityGrid& f, double t = 0.0);

/// Empirical moments of a team sample, each team carrying mass 1/N.
MomentReport empirical_moments(std::span<const double> thetas, std::span<const double> sigmas,
                               std::span<const double> ratings, double t = 0.0);

}  // namespace elo::analysis
