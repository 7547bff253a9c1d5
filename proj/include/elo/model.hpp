#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "elo/rating_function.hpp"

namespace elo {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream_id` of a run seeded with `seed`.
Rng derive_stream(std::uint64_t seed, std::uint64_t stream_id);

enum class MatchOutcome : int { Loss = -1, Win = 1 };

inline double as_real(MatchOutcome s) { return static_cast<double>(static_cast<int>(s)); }

/// A team of M players of which a line-up of m is fielded per match.
/// Strengths are kept sorted ascending.
class TeamRoster {
 public:
  TeamRoster(std::vector<double> strengths, int lineup_size);

  int size() const noexcept { return static_cast<int>(strengths_.size()); }
  int lineup_size() const noexcept { return lineup_size_; }
  std::span<const double> strengths() const noexcept { return strengths_; }

  /// C(M, m) as a double (exact below 2^53).
  double lineup_count() const;
  /// Mean line-up strength theta = (m / M) * sum(rho).
  double mean_strength() const;
  /// Variance of the line-up strength under uniform m-subset selection.
  double strength_variance() const;

 private:
  std::vector<double> strengths_;
  int lineup_size_;
};

/// Observable triple of a team: mean strength, strength spread, rating.
struct TeamState {
  double theta = 0.0;
  double sigma = 0.0;
  double rating = 0.0;
};

TeamState team_state(const TeamRoster& roster, double rating = 0.0);

/// Elo update for one match. Returns the new ratings of (i, j); the pair sum
/// is preserved.
std::pair<double, double> rating_update(double ri, double rj, MatchOutcome s, double gamma,
                                        const RatingFunction& b);

/// Strength sum of every m-subset of the roster, in lexicographic subset order.
/// Throws EnumerationTooLarge if C(M, m) > cap.
std::vector<double> enumerate_lineup_strengths(const TeamRoster& roster, double cap = 1e6);

inline constexpr double kDefaultPairCap = 1e6;

/// <S_ij> by enumerating all line-up pairs of two independent uniform
/// line-up processes. Throws EnumerationTooLarge above `pair_cap` pairs.
double exact_expected_outcome(const TeamRoster& team_i, const TeamRoster& team_j,
                              const RatingFunction& b, double pair_cap = kDefaultPairCap);

/// Second-order approximation b(dtheta) + b''(dtheta) (sigma_i^2 + sigma_j^2) / 2.
double taylor_expected_outcome(const TeamState& ti, const TeamState& tj, const RatingFunction& b);

/// Variance approximation b'(dtheta)^2 (sigma_i^2 + sigma_j^2).
double taylor_outcome_variance(const TeamState& ti, const TeamState& tj, const RatingFunction& b);

/// +1 with probability pwin, -1 otherwise.
MatchOutcome sample_outcome(double pwin, Rng& rng);

/// Win probability that makes <S> = b(gap).
inline double win_probability(double b_of_gap) { return 0.5 * (1.0 + b_of_gap); }

struct MonotonicityCheck {
  bool holds = true;
  double min_slope = 0.0;          ///< min of b' + sigma^2 b''' over the samples
  double argmin = 0.0;
  std::optional<double> fails_at;  ///< first sample with a negative slope
};

/// Samples g'(z) = b'(z) + sigma^2 b'''(z) on a uniform grid of n_samples
/// points over [z_lo, z_hi].
MonotonicityCheck check_b_prime_monotone(const RatingFunction& b, double sigma, double z_lo,
                                         double z_hi, int n_samples = 10001);

struct SlopeBounds {
  double lipschitz = 0.0;      ///< sup |b'|
  double lipschitz2 = 0.0;     ///< sup |b'''|
  double min_slope = 0.0;      ///< inf b'
  double min_slope2 = 0.0;     ///< inf b''' (signed)
};

/// Sup and inf slope constants of b and b'' over [z_lo, z_hi]; z_lo == z_hi
/// evaluates at the single point.
SlopeBounds lipschitz_estimates(const RatingFunction& b, double z_lo, double z_hi,
                                int n_samples = 10001);

}  // namespace elo
