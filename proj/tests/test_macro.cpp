#include <doctest.h>

#include <cmath>
#include <random>

#include "elo/errors.hpp"
#include "elo/grid.hpp"
#include "elo/macro.hpp"
#include "elo/moments.hpp"

using namespace elo;
using namespace elo::macro;

namespace {

DensityGrid random_density(DensityGrid f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : f.values()) v = u(rng);
  f.normalize();
  return f;
}

}  // namespace

TEST_CASE("axis geometry") {
  const Axis a{0.0, 10.0, 40};
  CHECK(a.spacing() == 0.25);
  CHECK(a.center(0) == 0.125);
  CHECK(a.interface(40) == 10.0);
  CHECK(a.cell_of(0.3) == 1);
  CHECK(a.cell_of(10.5) == -1);
}

TEST_CASE("density grid marginals and mass") {
  auto f = uniform_density(DensityGrid(Axis{0, 2, 4}, Axis{0, 1, 2}, Axis{0, 3, 6}));
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-14));
  double total = 0.0;
  for (double v : f.r_marginal()) total += v * f.r().spacing();
  CHECK(total == doctest::Approx(1.0));
  for (double c : f.conditional_mean_r()) CHECK(c == doctest::Approx(1.5));
  CHECK_THROWS_AS(DensityGrid(Axis{0, 1, 2}, Axis{0, 1, 2}).sigma(), UsageError);
}

TEST_CASE("drift of a point mass vanishes at its location") {
  DensityGrid f(Axis{0, 3, 3}, Axis{0, 1, 1}, Axis{0, 3, 3});
  f.at(0, 1, 1) = 1.0 / f.cell_volume();
  const auto b = RatingFunction::tanh(1.0);
  CHECK(drift_at(f, b, InteractionKernel::all_play_all(), 1.5, 0.5, 1.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("drift of a symmetric density vanishes at the center") {
  DensityGrid f(Axis{0, 4, 8}, Axis{0, 4, 8});
  for (int l = 0; l < 8; ++l)
    for (int j = 0; j < 8; ++j) f.at(l, j) = 1.0 + 0.1 * (l - 3.5) * (j - 3.5);
  f.normalize();
  const auto b = RatingFunction::tanh(1.0);
  CHECK(std::abs(drift_at(f, b, InteractionKernel::smooth_bump(), 2.0, 0.0, 2.0, 0.7)) <= 1e-14);
}

TEST_CASE("two-cell drift example") {
  // mass 1/2 at (theta, r) = (0, 0) and (1, 0)
  DensityGrid f(Axis{-0.5, 1.5, 2}, Axis{-0.5, 0.5, 1});
  f.at(0, 0) = 0.5;
  f.at(1, 0) = 0.5;
  const auto b = RatingFunction::tanh(1.0);
  const double oracle = 0.5 * (b(0.0) - b(0.0)) + 0.5 * (b(-1.0) - b(0.0));
  const double a = drift_at(f, b, InteractionKernel::all_play_all(), 0.0, 0.0, 0.0);
  CHECK(a == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(a == doctest::Approx(-0.38080).epsilon(1e-4));
}

TEST_CASE("factorized velocity matches direct quadrature") {
  const auto b = RatingFunction::tanh(0.8);
  for (const auto& w : {InteractionKernel::all_play_all(), InteractionKernel::indicator(1.3),
                        InteractionKernel::smooth_bump()}) {
    const auto f3 = random_density(DensityGrid(Axis{0, 5, 6}, Axis{0, 1, 3}, Axis{1, 6, 7}), 4);
    const auto a3 = assemble_velocity(f3, b, w);
    for (int m = 0; m < 3; ++m)
      for (int l = 0; l < 6; ++l)
        for (int j = 1; j < 7; ++j) {
          const double direct =
              drift_at(f3, b, w, f3.theta().center(l), f3.sigma().center(m), f3.r().interface(j));
          CHECK(a3.at(m, l, j) == doctest::Approx(direct).epsilon(1e-12));
        }
    const auto f2 = random_density(DensityGrid(Axis{0, 5, 6}, Axis{1, 6, 7}), 5);
    const auto a2 = assemble_velocity(f2, b, w, 0.6);
    for (int l = 0; l < 6; ++l)
      for (int j = 1; j < 7; ++j) {
        const double direct = drift_at(f2, b, w, f2.theta().center(l), 0.0, f2.r().interface(j), 0.6);
        CHECK(a2.at(0, l, j) == doctest::Approx(direct).epsilon(1e-12));
      }
    for (int l = 0; l < 6; ++l) {
      CHECK(a2.at(0, l, 0) == 0.0);
      CHECK(a2.at(0, l, 7) == 0.0);
    }
  }
}

TEST_CASE("godunov step basics") {
  const auto f = random_density(DensityGrid(Axis{0, 1, 3}, Axis{0, 1, 20}), 6);
  const auto same = godunov_step(f, VelocityField(1, 3, 20), 0.1);
  for (std::size_t k = 0; k < f.values().size(); ++k) CHECK(same.values()[k] == f.values()[k]);

  const auto b = RatingFunction::tanh(1.0);
  const auto a = assemble_velocity(f, b, InteractionKernel::all_play_all());
  const double dt = 0.5 * f.r().spacing() / a.max_abs();
  const auto g = godunov_step(f, a, dt);
  CHECK(std::abs(g.mass() - f.mass()) <= 1e-13 * f.mass());
  CHECK(g.min_value() >= -1e-14);

  CHECK_THROWS_AS(godunov_step(f, VelocityField::constant(f, 10.0), 1.0, 0.5), CflError);
  try {
    godunov_step(f, VelocityField::constant(f, 10.0), 1.0, 0.5);
  } catch (const CflError& e) {
    CHECK(e.max_speed() == 10.0);
    CHECK(e.admissible_dt() > 0.0);
  }
}

TEST_CASE("upwind advection converges at first order") {
  // compactly supported, so neither boundary is touched
  const auto bump = [](double x) {
    const double y = (x - 0.3) / 0.2;
    return std::abs(y) < 1.0 ? std::pow(1.0 - y * y, 4) : 0.0;
  };
  std::vector<double> errors;
  for (int n : {100, 200, 400}) {
    DensityGrid f(Axis{0, 1, 1}, Axis{0, 1, n});
    for (int j = 0; j < n; ++j) f.at(0, j) = bump(f.r().center(j));
    const double speed = 1.0;
    const double dt = 0.4 / n;
    const auto a = VelocityField::constant(f, speed);
    const int steps = static_cast<int>(std::lround(0.3 / dt));
    for (int s = 0; s < steps; ++s) f = godunov_step(f, a, dt);
    const double shift = steps * dt * speed;
    double err = 0.0;
    for (int j = 0; j < n; ++j) err += std::abs(f.at(0, j) - bump(f.r().center(j) - shift)) / n;
    errors.push_back(err);
  }
  for (std::size_t k = 1; k < errors.size(); ++k) CHECK(std::log2(errors[k - 1] / errors[k]) >= 0.8);
}

TEST_CASE("run_macro conserves mass and theta/sigma moments") {
  const auto f0 = uniform_density(DensityGrid(Axis{0, 10, 12}, Axis{0, 1, 3}, Axis{0, 10, 12}));
  MacroConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 0.5;
  const auto res = run_macro(f0, cfg);
  const auto& m0 = res.moments.front();
  for (const auto& m : res.moments) {
    CHECK(std::abs(m.mass - m0.mass) <= 1e-12);
    CHECK(std::abs(m.m1_theta - m0.m1_theta) <= 1e-12 * std::abs(m0.m1_theta));
    CHECK(std::abs(m.m2_theta - m0.m2_theta) <= 1e-12 * std::abs(m0.m2_theta));
    CHECK(std::abs(m.m2_sigma - m0.m2_sigma) <= 1e-12);
    CHECK(std::abs(m.m1_r - m0.m1_r) <= 1e-12 * std::abs(m0.m1_r));
  }
  for (std::size_t k = 1; k < res.moments.size(); ++k)
    CHECK(res.moments[k].m2_r_centered <= res.moments[k - 1].m2_r_centered + 1e-12);
  CHECK(res.snapshots.back().t == doctest::Approx(0.5));
  CHECK(res.min_value >= -1e-14);
}

TEST_CASE("run_macro: CFL handling") {
  const auto f0 = uniform_density(DensityGrid(Axis{0, 10, 10}, Axis{0, 10, 10}));
  MacroConfig cfg;
  cfg.dt = 1.0;
  cfg.t_end = 2.0;
  const auto clipped = run_macro(f0, cfg);
  CHECK(clipped.max_dt < 1.0);
  bool warned = false;
  for (const auto& w : clipped.warnings) warned = warned || w.find("CFL") != std::string::npos;
  CHECK(warned);
  cfg.adaptive_dt = false;
  CHECK_THROWS_AS(run_macro(f0, cfg), CflError);
}

TEST_CASE("run_macro rejects unnormalized or negative input") {
  auto f = uniform_density(DensityGrid(Axis{0, 1, 4}, Axis{0, 1, 4}));
  f.at(0, 0) *= 2.0;
  CHECK_THROWS_AS(run_macro(f, MacroConfig{}), ConfigError);
}

TEST_CASE("diagonal density is stationary") {
  DensityGrid f(Axis{4, 10, 30}, Axis{4, 10, 30});
  for (int l = 0; l < 30; ++l) f.at(l, l) = 1.0;
  f.normalize();
  MacroConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  const auto res = run_macro(f, cfg);
  CHECK(l1_distance(res.snapshots.back().f, f) <= 1e-3);
}

TEST_CASE("single sigma slice of a 3-D run equals the reduced 2-D run") {
  const double sigma = 0.625;
  const Axis th{0, 5, 10};
  const Axis r{0, 5, 10};
  const Axis sg{0, 1, 4};  // centers 0.125, 0.375, 0.625, 0.875
  const auto f2 = random_density(DensityGrid(th, r), 12);
  DensityGrid f3(th, sg, r);
  for (int l = 0; l < 10; ++l)
    for (int j = 0; j < 10; ++j) f3.at(2, l, j) = f2.at(l, j) / sg.spacing();
  CHECK(f3.mass() == doctest::Approx(1.0).epsilon(1e-14));

  MacroConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  cfg.adaptive_dt = false;
  cfg.nu = 0.9;
  const auto res3 = run_macro(f3, cfg);
  cfg.sigma_const = sigma;
  const auto res2 = run_macro(f2, cfg);
  CHECK(res3.steps == res2.steps);
  const auto reduced = reduce_to_2d(res3.snapshots.back().f, sigma);
  CHECK(reduced.sigma_const == sigma);
  CHECK(l1_distance(reduced.f, res2.snapshots.back().f) <= 1e-10);
  CHECK(reduce_to_2d(f3, 0.0).f.mass() == doctest::Approx(1.0).epsilon(1e-14));
}
