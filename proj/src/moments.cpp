#include "elo/moments.hpp"

#include "elo/errors.hpp"

namespace elo::analysis {

namespace {

void finish(MomentReport& rep) {
  if (rep.mass > 0.0) {
    const double mean_r = rep.m1_r / rep.mass;
    const double mean_theta = rep.m1_theta / rep.mass;
    rep.m2_r_centered = rep.m2_r - rep.mass * mean_r * mean_r;
    rep.m2_theta_centered = rep.m2_theta - rep.mass * mean_theta * mean_theta;
  }
}

}  // namespace

MomentReport compute_moments(const macro::DensityGrid& f, double t) {
  MomentReport rep;
  rep.t = t;
  const auto& th = f.theta();
  const auto& r = f.r();
  const double vol = f.cell_volume();
  for (int m = 0; m < f.n_sigma(); ++m) {
    const double s = f.has_sigma() ? f.sigma().center(m) : 0.0;
    double col_mass = 0.0;
    for (int l = 0; l < th.n; ++l) {
      const double x = th.center(l);
      double mass = 0.0;
      double r1 = 0.0;
      double r2 = 0.0;
      double e = 0.0;
      for (int j = 0; j < r.n; ++j) {
        const double v = f.at(m, l, j);
        const double y = r.center(j);
        mass += v;
        r1 += y * v;
        r2 += y * y * v;
        e += (y - x) * (y - x) * v;
      }
      rep.mass += mass;
      rep.m1_r += r1;
      rep.m2_r += r2;
      rep.m1_theta += x * mass;
      rep.m2_theta += x * x * mass;
      rep.energy += e;
      col_mass += mass;
    }
    rep.m2_sigma += s * s * col_mass;
  }
  rep.mass *= vol;
  rep.m1_r *= vol;
  rep.m2_r *= vol;
  rep.m1_theta *= vol;
  rep.m2_theta *= vol;
  rep.m2_sigma *= vol;
  rep.energy *= vol;
  finish(rep);
  return rep;
}

MomentReport empirical_moments(std::span<const double> thetas, std::span<const double> sigmas,
                               std::span<const double> ratings, double t) {
  if (thetas.empty() || thetas.size() != ratings.size() || sigmas.size() != thetas.size()) {
    throw UsageError("empirical_moments: need equally sized, nonempty samples");
  }
  MomentReport rep;
  rep.t = t;
  const double w = 1.0 / static_cast<double>(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    rep.mass += w;
    rep.m1_r += w * ratings[i];
    rep.m2_r += w * ratings[i] * ratings[i];
    rep.m1_theta += w * thetas[i];
    rep.m2_theta += w * thetas[i] * thetas[i];
    rep.m2_sigma += w * sigmas[i] * sigmas[i];
    rep.energy += w * (ratings[i] - thetas[i]) * (ratings[i] - thetas[i]);
  }
  finish(rep);
  return rep;
}

}  // namespace elo::analysis
