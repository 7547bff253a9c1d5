#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "elo/model.hpp"
#include "elo/rating_function.hpp"

namespace elo::micro {

/// Team whose per-match strength is drawn from N(theta, sigma^2).
struct GaussianStrength {
  double theta = 0.0;
  double sigma = 0.0;
};

using TeamModel = std::variant<TeamRoster, GaussianStrength>;

/// N teams with their current ratings. theta and sigma of each team are
/// fixed at construction; only ratings change during a run.
class Population {
 public:
  Population(std::vector<TeamModel> teams, std::vector<double> ratings);

  int size() const noexcept { return static_cast<int>(teams_.size()); }
  const TeamModel& team(int i) const { return teams_.at(i); }
  std::span<const TeamModel> teams() const noexcept { return teams_; }
  std::span<const double> ratings() const noexcept { return ratings_; }
  std::span<const double> thetas() const noexcept { return thetas_; }
  std::span<const double> sigmas() const noexcept { return sigmas_; }

  /// Adds c to every rating and every player strength (or Gaussian mean).
  Population translated(double c) const;

 private:
  std::vector<TeamModel> teams_;
  std::vector<double> ratings_;
  std::vector<double> thetas_;
  std::vector<double> sigmas_;
};

enum class LineupMode { UniformSubset, StrengthProportional, GaussianDraw };

struct MicroConfig {
  double dt = 0.1;
  int matches_per_step = 25;
  std::int64_t n_steps = 1000;
  int realizations = 50;
  double gamma = 0.01;
  double nu = 1.0;
  InteractionKernel kernel = InteractionKernel::all_play_all();
  LineupMode lineup_mode = LineupMode::UniformSubset;
  std::uint64_t seed = 1;
  /// Snapshot every this many steps (t = 0 and the final step always recorded).
  std::int64_t snapshot_stride = 0;
  /// Worker threads for realizations; 0 uses the hardware concurrency.
  int threads = 0;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

struct TeamSnapshot {
  double theta = 0.0;
  double sigma_est = 0.0;
  double rating = 0.0;
};

struct TrajectoryRecord {
  int realization = 0;
  double time = 0.0;
  std::vector<TeamSnapshot> teams;
};

struct ScatterRow {
  int team_id = 0;
  double theta = 0.0;
  double sigma_est = 0.0;
  double rating_mean = 0.0;
  double rating_std = 0.0;
};

struct MicroResult {
  /// Realization-major, time-ordered within each realization.
  std::vector<TrajectoryRecord> records;
  /// Per-team terminal rating averaged over realizations.
  std::vector<ScatterRow> scatter;
  std::int64_t matches_proposed = 0;
  std::int64_t matches_played = 0;
};

struct MatchEvent {
  int realization = 0;
  std::int64_t step = 0;
  int team_i = 0;
  int team_j = 0;
  double rating_i = 0.0;  ///< before the update
  double rating_j = 0.0;
  MatchOutcome outcome = MatchOutcome::Win;
};

/// Called for every played match. Invoked from worker threads; must be
/// thread-safe when more than one thread is used.
using MatchObserver = std::function<void(const MatchEvent&)>;

/// Setup R1: team i has 23 players uniform in (1/11)[5 - 5(i-1)/N, 5 + 5(i-1)/N],
/// line-ups of 11.
Population build_setup_r1(int n_teams, std::uint64_t seed, double initial_rating = 5.0);

/// Setup R2: teams 1..N-2 have players (1/11)(4 + 6(i-1)/(N-3) + eta), eta ~ N(0,1);
/// the last two teams have theta = 10 and 9 with line-up spread special_sigma.
Population build_setup_r2(int n_teams, std::uint64_t seed, double special_sigma = 2.0,
                          double initial_rating = 5.0);

/// Gaussian-strength teams with the given means and a common sigma.
Population build_gaussian_population(std::span<const double> thetas, double sigma,
                                     double initial_rating);

/// n values uniform in [lo, hi] from a seed-derived stream.
std::vector<double> uniform_thetas(int n, double lo, double hi, std::uint64_t seed);

struct MomentEstimate {
  double theta_hat = 0.0;
  double sigma_hat = 0.0;
  bool exact = false;
};

/// Mean and standard deviation of the line-up strength: exact enumeration when
/// C(M, m) <= enumeration_cap, otherwise n_draws uniform line-ups.
MomentEstimate estimate_team_moments(const TeamRoster& roster, int n_draws, Rng& rng,
                                     double enumeration_cap = 1e6);

/// Strength of one fielded line-up (or Gaussian draw) for a single match.
double draw_match_strength(const TeamModel& team, LineupMode mode, Rng& rng);

/// Bird-scheme match dynamics: per step, matches_per_step candidate pairs,
/// kernel acceptance-rejection, sampled line-ups and outcomes, Elo updates.
MicroResult run_micro(const Population& pop, const MicroConfig& cfg,
                      const MatchObserver& observer = {});

/// run_micro with per-match strengths drawn from N(theta_n, sigma^2).
MicroResult run_micro_gaussian(std::span<const double> thetas, double sigma, double initial_rating,
                               MicroConfig cfg, const MatchObserver& observer = {});

/// Realization-averaged ratings per recorded time (one entry per snapshot time).
struct MeanSnapshot {
  double time = 0.0;
  std::vector<double> mean_rating;
};
std::vector<MeanSnapshot> realization_means(const MicroResult& result, int n_teams);

}  // namespace elo::micro
