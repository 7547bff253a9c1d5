#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elo/micro.hpp"
#include "elo/rating_function.hpp"

namespace elo::experiment {

enum class Mode { Micro, Macro, Macro2d, Analyze, Check };

Mode parse_mode(std::string_view text);
std::string to_string(Mode mode);

enum class PopulationKind { Gaussian, SetupR1, SetupR2 };

/// Everything that determines a run. Serialized as flat `key = value` text
/// whose keys carry their units; see to_config_text().
struct ExperimentConfig {
  Mode mode = Mode::Micro;
  std::string preset;  ///< empty for a custom run
  std::uint64_t seed = 1;
  int threads = 0;
  bool paper_scale = false;

  // micro engine
  PopulationKind population = PopulationKind::Gaussian;
  int n_teams = 100;
  std::int64_t steps = 10000;
  int realizations = 50;
  int matches_per_step = 25;
  double micro_dt = 0.1;
  double gamma = 0.01;
  double special_sigma = 2.0;
  std::optional<double> initial_rating;  ///< default: midpoint of the theta domain
  micro::LineupMode lineup_mode = micro::LineupMode::UniformSubset;
  std::int64_t snapshot_stride = 0;      ///< micro steps between trajectory snapshots
  bool write_trajectories = false;

  // shared model
  double nu = 1.0;
  double sigma = 0.0;
  InteractionKernel kernel = InteractionKernel::all_play_all();
  double theta_lo = 4.0;
  double theta_hi = 10.0;
  /// Swept parameter values: sigma for fig5-sweep, nu for fig7-nu-sweep.
  std::vector<double> sweep;

  // macro engine
  double r_lo = 4.0;
  double r_hi = 10.0;
  double sigma_lo = 0.0;
  double sigma_hi = 1.0;
  int n_theta = 60;
  int n_r = 60;
  int n_sigma = 10;
  double macro_dt = 1e-3;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  std::int64_t macro_snapshot_stride = 0;
  int velocity_refresh = 1;

  // analyze / check
  std::string scatter_file;
  std::string moments_file;
  std::string snapshot_file;
  double z_lo = -10.0;
  double z_hi = 10.0;

  double effective_initial_rating() const {
    return initial_rating.value_or(0.5 * (theta_lo + theta_hi));
  }
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"r1", "r2", "fig4-uniform", "fig5-sweep", "fig7-nu-sweep"};
  return names;
}

/// Defaults of a named preset at desk or paper scale. Throws ConfigError for
/// unknown names.
ExperimentConfig preset_config(std::string_view name, bool paper_scale = false);

/// Applies `key = value` lines ('#' starts a comment). Unknown keys and
/// unparsable values throw ConfigError.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
std::string to_config_text(const ExperimentConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;  ///< informational lines for the verdict summary

  bool all_passed() const;
};

/// Runs the configured mode or preset, writes CSV outputs, config.txt,
/// manifest.json and verdict.txt under `out`. Throws ConfigError,
/// CflError / NumericalError on failures of the respective kind.
RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Assumption check on b + sigma^2 b'' over [z_lo, z_hi].
RunReport run_check(const ExperimentConfig& cfg);

/// Post-processes CSV files named in the config.
RunReport run_analyze(const ExperimentConfig& cfg, const std::filesystem::path& out);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCheckFailed = 4;

inline constexpr const char* kCodeVersion = "0.1.0";

}  // namespace elo::experiment
