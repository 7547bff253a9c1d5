#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elo/analysis.hpp"
#include "elo/grid.hpp"
#include "elo/micro.hpp"
#include "elo/moments.hpp"

namespace elo::io {

// All writers emit a header line and full-precision (%.17g) values, so equal
// inputs give byte-identical files. Readers check the header and throw
// std::runtime_error on malformed input.

/// realization,t,team_id,theta,sigma_est,rating
void write_trajectories(const std::filesystem::path& path, std::span<const micro::TrajectoryRecord> records);

/// team_id,theta,sigma_est,rating_mean,rating_std
void write_scatter(const std::filesystem::path& path, std::span<const micro::ScatterRow> rows);
std::vector<micro::ScatterRow> read_scatter(const std::filesystem::path& path);

/// theta,sigma,r,f (3-D) or theta,r,f (2-D)
void write_snapshot(const std::filesystem::path& path, const macro::DensityGrid& f);
/// Rebuilds the grid geometry from the cell centers in the file.
macro::DensityGrid read_snapshot(const std::filesystem::path& path);

/// <axis>,density
void write_marginal(const std::filesystem::path& path, const std::string& axis_name,
                    const macro::Axis& axis, std::span<const double> density);

/// t,mass,m1_r,m2_r,energy
void write_moments(const std::filesystem::path& path, std::span<const analysis::MomentReport> moments);
std::vector<analysis::MomentReport> read_moments(const std::filesystem::path& path);

/// Two-column series with the given header names.
void write_series(const std::filesystem::path& path, const std::string& x_name, const std::string& y_name,
                  std::span<const std::pair<double, double>> series);

}  // namespace elo::io
