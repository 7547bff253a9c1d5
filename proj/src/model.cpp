#include "elo/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "elo/errors.hpp"

namespace elo {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

}  // namespace

Rng derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
  return Rng(seq);
}

TeamRoster::TeamRoster(std::vector<double> strengths, int lineup_size)
    : strengths_(std::move(strengths)), lineup_size_(lineup_size) {
  if (strengths_.empty()) throw DomainError("roster: no players");
  if (lineup_size_ < 1 || lineup_size_ > size()) {
    throw DomainError("roster: line-up size must satisfy 1 <= m <= M");
  }
  for (double rho : strengths_) require_finite(rho, "player strength");
  std::sort(strengths_.begin(), strengths_.end());
}

double TeamRoster::lineup_count() const { return binomial(size(), lineup_size_); }

double TeamRoster::mean_strength() const {
  const double sum = std::accumulate(strengths_.begin(), strengths_.end(), 0.0);
  return static_cast<double>(lineup_size_) / size() * sum;
}

double TeamRoster::strength_variance() const {
  const int n = size();
  if (n == 1 || lineup_size_ == n) return 0.0;
  const double mean = std::accumulate(strengths_.begin(), strengths_.end(), 0.0) / n;
  double ss = 0.0;
  for (double rho : strengths_) ss += (rho - mean) * (rho - mean);
  // sampling m of n without replacement: Var(sum) = m (n - m) / (n (n - 1)) * sum (rho - mean)^2
  const double m = lineup_size_;
  return m * (n - m) / (static_cast<double>(n) * (n - 1)) * ss;
}

TeamState team_state(const TeamRoster& roster, double rating) {
  return TeamState{roster.mean_strength(), std::sqrt(roster.strength_variance()), rating};
}

std::pair<double, double> rating_update(double ri, double rj, MatchOutcome s, double gamma,
                                        const RatingFunction& b) {
  require_finite(ri, "rating");
  require_finite(rj, "rating");
  if (!std::isfinite(gamma) || gamma <= 0.0) throw DomainError("gamma must be positive and finite");
  const double delta = gamma * (as_real(s) - b(ri - rj));
  return {ri + delta, rj - delta};
}

std::vector<double> enumerate_lineup_strengths(const TeamRoster& roster, double cap) {
  const double count = roster.lineup_count();
  if (count > cap) throw EnumerationTooLarge(count, cap);
  const int n = roster.size();
  const int m = roster.lineup_size();
  const auto rho = roster.strengths();

  std::vector<double> sums;
  sums.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    double s = 0.0;
    for (int k : idx) s += rho[k];
    sums.push_back(s);
    int pos = m - 1;
    while (pos >= 0 && idx[pos] == n - m + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int q = pos + 1; q < m; ++q) idx[q] = idx[q - 1] + 1;
  }
  return sums;
}

double exact_expected_outcome(const TeamRoster& team_i, const TeamRoster& team_j,
                              const RatingFunction& b, double pair_cap) {
  const double pairs = team_i.lineup_count() * team_j.lineup_count();
  if (pairs > pair_cap) throw EnumerationTooLarge(pairs, pair_cap);
  const auto xi = enumerate_lineup_strengths(team_i, pair_cap);
  const auto xj = enumerate_lineup_strengths(team_j, pair_cap);
  double total = 0.0;
  for (double a : xi) {
    double row = 0.0;
    for (double c : xj) row += b(a - c);
    total += row;
  }
  return total / (static_cast<double>(xi.size()) * static_cast<double>(xj.size()));
}

double taylor_expected_outcome(const TeamState& ti, const TeamState& tj, const RatingFunction& b) {
  require_finite(ti.theta, "theta");
  require_finite(tj.theta, "theta");
  require_finite(ti.sigma, "sigma");
  require_finite(tj.sigma, "sigma");
  const double gap = ti.theta - tj.theta;
  return b(gap) + 0.5 * b.deriv2(gap) * (ti.sigma * ti.sigma + tj.sigma * tj.sigma);
}

double taylor_outcome_variance(const TeamState& ti, const TeamState& tj, const RatingFunction& b) {
  require_finite(ti.theta, "theta");
  require_finite(tj.theta, "theta");
  require_finite(ti.sigma, "sigma");
  require_finite(tj.sigma, "sigma");
  const double slope = b.deriv1(ti.theta - tj.theta);
  return slope * slope * (ti.sigma * ti.sigma + tj.sigma * tj.sigma);
}

MatchOutcome sample_outcome(double pwin, Rng& rng) {
  if (!(pwin >= 0.0 && pwin <= 1.0)) throw DomainError("win probability must lie in [0, 1]");
  const double u = std::generate_canonical<double, 53>(rng);
  return u < pwin ? MatchOutcome::Win : MatchOutcome::Loss;
}

MonotonicityCheck check_b_prime_monotone(const RatingFunction& b, double sigma, double z_lo,
                                         double z_hi, int n_samples) {
  if (!(z_lo < z_hi)) throw DomainError("monotonicity check: need z_lo < z_hi");
  if (n_samples < 2) throw DomainError("monotonicity check: need at least two samples");
  MonotonicityCheck out;
  const double s2 = sigma * sigma;
  const double h = (z_hi - z_lo) / (n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    const double z = z_lo + k * h;
    const double g = b.deriv1(z) + s2 * b.deriv3(z);
    if (k == 0 || g < out.min_slope) {
      out.min_slope = g;
      out.argmin = z;
    }
    if (g < 0.0 && !out.fails_at) out.fails_at = z;
  }
  out.holds = !out.fails_at.has_value();
  return out;
}

SlopeBounds lipschitz_estimates(const RatingFunction& b, double z_lo, double z_hi,
                                int n_samples) {
  if (!std::isfinite(z_lo) || !std::isfinite(z_hi) || z_lo > z_hi) {
    throw DomainError("slope bounds: need a bounded interval");
  }
  const int n = (z_lo == z_hi) ? 1 : std::max(n_samples, 2);
  const double h = n > 1 ? (z_hi - z_lo) / (n - 1) : 0.0;
  SlopeBounds out;
  for (int k = 0; k < n; ++k) {
    const double z = z_lo + k * h;
    const double d1 = b.deriv1(z);
    const double d3 = b.deriv3(z);
    if (k == 0) {
      out = SlopeBounds{std::abs(d1), std::abs(d3), d1, d3};
      continue;
    }
    out.lipschitz = std::max(out.lipschitz, std::abs(d1));
    out.lipschitz2 = std::max(out.lipschitz2, std::abs(d3));
    out.min_slope = std::min(out.min_slope, d1);
    out.min_slope2 = std::min(out.min_slope2, d3);
  }
  return out;
}

}  // namespace elo
