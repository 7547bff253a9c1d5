#include "elo/micro.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "elo/errors.hpp"

namespace elo::micro {

namespace {

constexpr int kPlayersPerTeam = 23;
constexpr int kLineupSize = 11;

constexpr std::uint64_t kStreamSetupR1 = 1;
constexpr std::uint64_t kStreamSetupR2 = 2;
constexpr std::uint64_t kStreamThetas = 3;
constexpr std::uint64_t kStreamRealizationBase = std::uint64_t{1} << 32;

struct TeamMoments {
  double theta;
  double sigma;
};

TeamMoments moments_of(const TeamModel& team) {
  if (const auto* roster = std::get_if<TeamRoster>(&team)) {
    return {roster->mean_strength(), std::sqrt(roster->strength_variance())};
  }
  const auto& g = std::get<GaussianStrength>(team);
  return {g.theta, g.sigma};
}

double uniform_lineup(const TeamRoster& roster, Rng& rng, std::vector<int>& scratch) {
  const int n = roster.size();
  const int m = roster.lineup_size();
  const auto rho = roster.strengths();
  if (m == n) return std::accumulate(rho.begin(), rho.end(), 0.0);
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), 0);
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    std::uniform_int_distribution<int> pick(k, n - 1);
    std::swap(scratch[k], scratch[pick(rng)]);
    sum += rho[scratch[k]];
  }
  return sum;
}

// Successive draws without replacement, each player picked with probability
// proportional to its strength among those still available.
double proportional_lineup(const TeamRoster& roster, Rng& rng, std::vector<int>& scratch) {
  const int n = roster.size();
  const int m = roster.lineup_size();
  const auto rho = roster.strengths();
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), 0);
  double remaining = std::accumulate(rho.begin(), rho.end(), 0.0);
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double target = std::generate_canonical<double, 53>(rng) * remaining;
    double acc = 0.0;
    int chosen = n - 1;
    for (int q = k; q < n; ++q) {
      acc += rho[scratch[q]];
      if (target < acc) {
        chosen = q;
        break;
      }
    }
    std::swap(scratch[k], scratch[chosen]);
    const double picked = rho[scratch[k]];
    sum += picked;
    remaining -= picked;
  }
  return sum;
}

void record(MicroResult& out, int realization, double time, std::span<const double> ratings,
            const Population& pop) {
  TrajectoryRecord rec;
  rec.realization = realization;
  rec.time = time;
  rec.teams.resize(ratings.size());
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    rec.teams[i] = TeamSnapshot{pop.thetas()[i], pop.sigmas()[i], ratings[i]};
  }
  out.records.push_back(std::move(rec));
}

// Per-realization line-up sampler; keeps one standard normal generator
// instead of building a distribution per draw.
class StrengthSampler {
 public:
  StrengthSampler(const Population& pop, LineupMode mode) : mode_(mode) {
    for (const auto& team : pop.teams()) {
      const auto* roster = std::get_if<TeamRoster>(&team);
      const bool gaussian = roster == nullptr || mode == LineupMode::GaussianDraw;
      const auto mom = moments_of(team);
      teams_.push_back({gaussian ? nullptr : roster, mom.theta, mom.sigma});
    }
  }

  double operator()(int i, Rng& rng) {
    const auto& t = teams_[i];
    if (t.roster == nullptr) return t.sigma == 0.0 ? t.theta : t.theta + t.sigma * normal_(rng);
    return mode_ == LineupMode::UniformSubset ? uniform_lineup(*t.roster, rng, scratch_)
                                              : proportional_lineup(*t.roster, rng, scratch_);
  }

 private:
  struct Entry {
    const TeamRoster* roster;
    double theta;
    double sigma;
  };
  LineupMode mode_;
  std::vector<Entry> teams_;
  std::vector<int> scratch_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

MicroResult run_realization(const Population& pop, const MicroConfig& cfg, int realization,
                            const MatchObserver& observer) {
  MicroResult out;
  Rng rng = derive_stream(cfg.seed, kStreamRealizationBase + static_cast<std::uint64_t>(realization));
  const auto b = RatingFunction::tanh(cfg.nu);
  const auto& w = cfg.kernel;
  const bool always_play = w.kind() == InteractionKernel::Kind::AllPlayAll;
  const double w_max = w.max_value();
  const int n = pop.size();

  std::vector<double> ratings(pop.ratings().begin(), pop.ratings().end());
  StrengthSampler strength(pop, cfg.lineup_mode);
  std::uniform_int_distribution<int> first(0, n - 1);
  std::uniform_int_distribution<int> second(0, n - 2);

  record(out, realization, 0.0, ratings, pop);
  for (std::int64_t step = 1; step <= cfg.n_steps; ++step) {
    for (int k = 0; k < cfg.matches_per_step; ++k) {
      const int i = first(rng);
      int j = second(rng);
      if (j >= i) ++j;
      ++out.matches_proposed;
      if (!always_play) {
        const double accept = w(ratings[i] - ratings[j]) / w_max;
        if (!(std::generate_canonical<double, 53>(rng) < accept)) continue;
      }
      ++out.matches_played;
      const double xi = strength(i, rng);
      const double xj = strength(j, rng);
      const MatchOutcome s = sample_outcome(win_probability(b(xi - xj)), rng);
      if (observer) {
        observer(MatchEvent{realization, step, i, j, ratings[i], ratings[j], s});
      }
      const auto [ri, rj] = rating_update(ratings[i], ratings[j], s, cfg.gamma, b);
      ratings[i] = ri;
      ratings[j] = rj;
    }
    const bool on_stride = cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0;
    if (on_stride || step == cfg.n_steps) {
      record(out, realization, static_cast<double>(step) * cfg.dt, ratings, pop);
    }
  }
  return out;
}

void check_lineup_mode(const Population& pop, LineupMode mode) {
  if (mode != LineupMode::StrengthProportional) return;
  for (const auto& team : pop.teams()) {
    const auto* roster = std::get_if<TeamRoster>(&team);
    if (!roster) continue;
    const auto rho = roster->strengths();
    if (rho.front() < 0.0 || std::accumulate(rho.begin(), rho.end(), 0.0) <= 0.0) {
      throw ConfigError("strength-proportional line-ups need nonnegative strengths");
    }
  }
}

}  // namespace

Population::Population(std::vector<TeamModel> teams, std::vector<double> ratings)
    : teams_(std::move(teams)), ratings_(std::move(ratings)) {
  if (teams_.empty()) throw ConfigError("population: no teams");
  if (teams_.size() != ratings_.size()) throw ConfigError("population: one rating per team required");
  for (const auto& team : teams_) {
    if (const auto* g = std::get_if<GaussianStrength>(&team)) {
      if (!std::isfinite(g->theta) || !std::isfinite(g->sigma) || g->sigma < 0.0) {
        throw ConfigError("population: Gaussian team needs finite theta and sigma >= 0");
      }
    }
    const auto mom = moments_of(team);
    thetas_.push_back(mom.theta);
    sigmas_.push_back(mom.sigma);
  }
  for (double r : ratings_) {
    if (!std::isfinite(r)) throw ConfigError("population: ratings must be finite");
  }
}

Population Population::translated(double c) const {
  std::vector<TeamModel> teams;
  teams.reserve(teams_.size());
  for (const auto& team : teams_) {
    if (const auto* roster = std::get_if<TeamRoster>(&team)) {
      // each fielded line-up sums m players, so shift players by c / m
      const double per_player = c / roster->lineup_size();
      std::vector<double> rho(roster->strengths().begin(), roster->strengths().end());
      for (double& x : rho) x += per_player;
      teams.emplace_back(TeamRoster(std::move(rho), roster->lineup_size()));
    } else {
      auto g = std::get<GaussianStrength>(team);
      g.theta += c;
      teams.emplace_back(g);
    }
  }
  std::vector<double> ratings = ratings_;
  for (double& r : ratings) r += c;
  return Population(std::move(teams), std::move(ratings));
}

void MicroConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("micro: dt must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("micro: gamma must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("micro: nu must be positive");
  if (matches_per_step < 1) throw ConfigError("micro: matches_per_step must be >= 1");
  if (n_steps < 0) throw ConfigError("micro: n_steps must be >= 0");
  if (realizations < 1) throw ConfigError("micro: realizations must be >= 1");
  if (snapshot_stride < 0) throw ConfigError("micro: snapshot_stride must be >= 0");
  if (threads < 0) throw ConfigError("micro: threads must be >= 0");
  if (!(kernel.max_value() > 0.0)) throw ConfigError("micro: kernel with w_max = 0");
}

Population build_setup_r1(int n_teams, std::uint64_t seed, double initial_rating) {
  if (n_teams < 1) throw ConfigError("setup R1: n_teams must be >= 1");
  Rng rng = derive_stream(seed, kStreamSetupR1);
  std::vector<TeamModel> teams;
  teams.reserve(n_teams);
  for (int i = 1; i <= n_teams; ++i) {
    const double half = 5.0 * (i - 1) / n_teams;
    std::vector<double> rho(kPlayersPerTeam);
    if (half == 0.0) {
      std::fill(rho.begin(), rho.end(), 5.0 / 11.0);
    } else {
      std::uniform_real_distribution<double> u((5.0 - half) / 11.0, (5.0 + half) / 11.0);
      for (double& x : rho) x = u(rng);
    }
    teams.emplace_back(TeamRoster(std::move(rho), kLineupSize));
  }
  return Population(std::move(teams), std::vector<double>(n_teams, initial_rating));
}

Population build_setup_r2(int n_teams, std::uint64_t seed, double special_sigma,
                          double initial_rating) {
  if (n_teams < 4) throw ConfigError("setup R2: n_teams must be >= 4");
  if (!(special_sigma >= 0.0) || !std::isfinite(special_sigma)) {
    throw ConfigError("setup R2: special_sigma must be finite and >= 0");
  }
  Rng rng = derive_stream(seed, kStreamSetupR2);
  std::normal_distribution<double> eta(0.0, 1.0);
  std::vector<TeamModel> teams;
  teams.reserve(n_teams);
  const int regular = n_teams - 2;
  for (int i = 1; i <= regular; ++i) {
    const double base = 4.0 + 6.0 * (i - 1) / (n_teams - 3);
    std::vector<double> rho(kPlayersPerTeam);
    for (double& x : rho) x = (base + eta(rng)) / 11.0;
    teams.emplace_back(TeamRoster(std::move(rho), kLineupSize));
  }
  // Outlier teams: centered linear player profile scaled so that the line-up
  // sum has mean theta and standard deviation special_sigma.
  const int M = kPlayersPerTeam;
  const int m = kLineupSize;
  double ss = 0.0;
  for (int k = 0; k < M; ++k) ss += (k - (M - 1) / 2.0) * (k - (M - 1) / 2.0);
  const double var_factor = static_cast<double>(m) * (M - m) / (static_cast<double>(M) * (M - 1)) * ss;
  const double scale = special_sigma / std::sqrt(var_factor);
  for (double theta : {10.0, 9.0}) {
    std::vector<double> rho(M);
    for (int k = 0; k < M; ++k) rho[k] = theta / m + scale * (k - (M - 1) / 2.0);
    teams.emplace_back(TeamRoster(std::move(rho), m));
  }
  return Population(std::move(teams), std::vector<double>(n_teams, initial_rating));
}

Population build_gaussian_population(std::span<const double> thetas, double sigma,
                                     double initial_rating) {
  std::vector<TeamModel> teams;
  teams.reserve(thetas.size());
  for (double th : thetas) teams.emplace_back(GaussianStrength{th, sigma});
  return Population(std::move(teams), std::vector<double>(thetas.size(), initial_rating));
}

std::vector<double> uniform_thetas(int n, double lo, double hi, std::uint64_t seed) {
  if (n < 1 || !(lo <= hi)) throw ConfigError("uniform_thetas: need n >= 1 and lo <= hi");
  Rng rng = derive_stream(seed, kStreamThetas);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& x : out) x = u(rng);
  return out;
}

MomentEstimate estimate_team_moments(const TeamRoster& roster, int n_draws, Rng& rng,
                                     double enumeration_cap) {
  if (roster.lineup_count() <= enumeration_cap) {
    const auto sums = enumerate_lineup_strengths(roster, enumeration_cap);
    const double n = static_cast<double>(sums.size());
    const double mean = std::accumulate(sums.begin(), sums.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : sums) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n), true};
  }
  if (n_draws < 2) throw DomainError("estimate_team_moments: need at least two draws");
  std::vector<int> scratch;
  double mean = 0.0;
  double m2 = 0.0;
  for (int k = 1; k <= n_draws; ++k) {
    const double x = uniform_lineup(roster, rng, scratch);
    const double d = x - mean;
    mean += d / k;
    m2 += d * (x - mean);
  }
  return {mean, std::sqrt(m2 / (n_draws - 1)), false};
}

double draw_match_strength(const TeamModel& team, LineupMode mode, Rng& rng) {
  thread_local std::vector<int> scratch;
  if (const auto* g = std::get_if<GaussianStrength>(&team)) {
    if (g->sigma == 0.0) return g->theta;
    std::normal_distribution<double> dist(g->theta, g->sigma);
    return dist(rng);
  }
  const auto& roster = std::get<TeamRoster>(team);
  switch (mode) {
    case LineupMode::UniformSubset:
      return uniform_lineup(roster, rng, scratch);
    case LineupMode::StrengthProportional:
      return proportional_lineup(roster, rng, scratch);
    case LineupMode::GaussianDraw: {
      const double sigma = std::sqrt(roster.strength_variance());
      if (sigma == 0.0) return roster.mean_strength();
      std::normal_distribution<double> dist(roster.mean_strength(), sigma);
      return dist(rng);
    }
  }
  return 0.0;
}

MicroResult run_micro(const Population& pop, const MicroConfig& cfg, const MatchObserver& observer) {
  cfg.validate();
  if (pop.size() < 2) throw ConfigError("micro: need at least two teams");
  check_lineup_mode(pop, cfg.lineup_mode);

  const int n_real = cfg.realizations;
  std::vector<MicroResult> parts(n_real);
  int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n_real);

  if (workers == 1) {
    for (int r = 0; r < n_real; ++r) parts[r] = run_realization(pop, cfg, r, observer);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int r = next++; r < n_real; r = next++) parts[r] = run_realization(pop, cfg, r, observer);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MicroResult out;
  const int n = pop.size();
  std::vector<double> sum(n, 0.0);
  std::vector<double> sum_sq(n, 0.0);
  for (auto& part : parts) {
    out.matches_proposed += part.matches_proposed;
    out.matches_played += part.matches_played;
    const auto& last = part.records.back();
    for (int i = 0; i < n; ++i) {
      sum[i] += last.teams[i].rating;
      sum_sq[i] += last.teams[i].rating * last.teams[i].rating;
    }
    std::move(part.records.begin(), part.records.end(), std::back_inserter(out.records));
  }
  out.scatter.resize(n);
  for (int i = 0; i < n; ++i) {
    const double mean = sum[i] / n_real;
    double var = 0.0;
    if (n_real > 1) var = std::max(0.0, (sum_sq[i] - n_real * mean * mean) / (n_real - 1));
    out.scatter[i] = ScatterRow{i, pop.thetas()[i], pop.sigmas()[i], mean, std::sqrt(var)};
  }
  return out;
}

MicroResult run_micro_gaussian(std::span<const double> thetas, double sigma, double initial_rating,
                               MicroConfig cfg, const MatchObserver& observer) {
  if (!(sigma >= 0.0)) throw ConfigError("micro: sigma must be >= 0");
  cfg.lineup_mode = LineupMode::GaussianDraw;
  return run_micro(build_gaussian_population(thetas, sigma, initial_rating), cfg, observer);
}

std::vector<MeanSnapshot> realization_means(const MicroResult& result, int n_teams) {
  std::vector<MeanSnapshot> out;
  std::vector<int> counts;
  for (const auto& rec : result.records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const MeanSnapshot& s) { return s.time == rec.time; });
    if (it == out.end()) {
      out.push_back(MeanSnapshot{rec.time, std::vector<double>(n_teams, 0.0)});
      counts.push_back(0);
      it = std::prev(out.end());
    }
    const auto k = static_cast<std::size_t>(it - out.begin());
    for (int i = 0; i < n_teams; ++i) it->mean_rating[i] += rec.teams.at(i).rating;
    ++counts[k];
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (double& r : out[k].mean_rating) r /= counts[k];
  }
  std::sort(out.begin(), out.end(), [](const MeanSnapshot& a, const MeanSnapshot& b) { return a.time < b.time; });
  return out;
}

}  // namespace elo::micro
