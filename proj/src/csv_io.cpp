#include "elo/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace elo::io {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != c.size()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void expect_header(const Table& t, const std::vector<std::string>& want, const std::filesystem::path& path) {
  if (t.header != want) throw std::runtime_error(path.string() + ": unexpected header");
}

// Axis from a set of cell centers.
macro::Axis axis_from_centers(std::vector<double> centers, const std::string& name) {
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  if (centers.size() < 2) throw std::runtime_error("snapshot: need at least two " + name + " cells");
  const int n = static_cast<int>(centers.size());
  const double h = (centers.back() - centers.front()) / (n - 1);
  return macro::Axis{centers.front() - 0.5 * h, centers.back() + 0.5 * h, n};
}

int nearest_cell(const macro::Axis& a, double x) {
  const int i = static_cast<int>(std::lround((x - a.lo) / a.spacing() - 0.5));
  return std::clamp(i, 0, a.n - 1);
}

}  // namespace

void write_trajectories(const std::filesystem::path& path, std::span<const micro::TrajectoryRecord> records) {
  auto out = open_out(path);
  out << "realization,t,team_id,theta,sigma_est,rating\n";
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.teams.size(); ++i) {
      const auto& s = rec.teams[i];
      out << rec.realization << ',' << num(rec.time) << ',' << i << ',' << num(s.theta) << ','
          << num(s.sigma_est) << ',' << num(s.rating) << '\n';
    }
  }
  close_out(out, path);
}

void write_scatter(const std::filesystem::path& path, std::span<const micro::ScatterRow> rows) {
  auto out = open_out(path);
  out << "team_id,theta,sigma_est,rating_mean,rating_std\n";
  for (const auto& r : rows) {
    out << r.team_id << ',' << num(r.theta) << ',' << num(r.sigma_est) << ',' << num(r.rating_mean) << ','
        << num(r.rating_std) << '\n';
  }
  close_out(out, path);
}

std::vector<micro::ScatterRow> read_scatter(const std::filesystem::path& path) {
  const auto t = read_table(path);
  expect_header(t, {"team_id", "theta", "sigma_est", "rating_mean", "rating_std"}, path);
  std::vector<micro::ScatterRow> rows;
  for (const auto& r : t.rows) rows.push_back({static_cast<int>(r[0]), r[1], r[2], r[3], r[4]});
  return rows;
}

void write_snapshot(const std::filesystem::path& path, const macro::DensityGrid& f) {
  auto out = open_out(path);
  out << (f.has_sigma() ? "theta,sigma,r,f\n" : "theta,r,f\n");
  for (int m = 0; m < f.n_sigma(); ++m)
    for (int l = 0; l < f.n_theta(); ++l)
      for (int j = 0; j < f.n_r(); ++j) {
        out << num(f.theta().center(l)) << ',';
        if (f.has_sigma()) out << num(f.sigma().center(m)) << ',';
        out << num(f.r().center(j)) << ',' << num(f.at(m, l, j)) << '\n';
      }
  close_out(out, path);
}

macro::DensityGrid read_snapshot(const std::filesystem::path& path) {
  const auto t = read_table(path);
  const bool three_d = t.header == std::vector<std::string>{"theta", "sigma", "r", "f"};
  if (!three_d) expect_header(t, {"theta", "r", "f"}, path);
  const std::size_t c_theta = 0;
  const std::size_t c_r = three_d ? 2 : 1;
  const std::size_t c_f = three_d ? 3 : 2;
  std::vector<double> thetas, rs, sigmas;
  for (const auto& row : t.rows) {
    thetas.push_back(row[c_theta]);
    rs.push_back(row[c_r]);
    if (three_d) sigmas.push_back(row[1]);
  }
  const auto ax_theta = axis_from_centers(thetas, "theta");
  const auto ax_r = axis_from_centers(rs, "r");
  macro::DensityGrid f = three_d ? macro::DensityGrid(ax_theta, axis_from_centers(sigmas, "sigma"), ax_r)
                                 : macro::DensityGrid(ax_theta, ax_r);
  for (const auto& row : t.rows) {
    const int l = nearest_cell(ax_theta, row[c_theta]);
    const int j = nearest_cell(ax_r, row[c_r]);
    const int m = three_d ? nearest_cell(f.sigma(), row[1]) : 0;
    f.at(m, l, j) = row[c_f];
  }
  return f;
}

void write_marginal(const std::filesystem::path& path, const std::string& axis_name, const macro::Axis& axis,
                    std::span<const double> density) {
  auto out = open_out(path);
  out << axis_name << ",density\n";
  for (int i = 0; i < axis.n; ++i) out << num(axis.center(i)) << ',' << num(density[i]) << '\n';
  close_out(out, path);
}

void write_moments(const std::filesystem::path& path, std::span<const analysis::MomentReport> moments) {
  auto out = open_out(path);
  out << "t,mass,m1_r,m2_r,energy\n";
  for (const auto& m : moments) {
    out << num(m.t) << ',' << num(m.mass) << ',' << num(m.m1_r) << ',' << num(m.m2_r) << ',' << num(m.energy)
        << '\n';
  }
  close_out(out, path);
}

std::vector<analysis::MomentReport> read_moments(const std::filesystem::path& path) {
  const auto t = read_table(path);
  expect_header(t, {"t", "mass", "m1_r", "m2_r", "energy"}, path);
  std::vector<analysis::MomentReport> out;
  for (const auto& r : t.rows) {
    analysis::MomentReport m;
    m.t = r[0];
    m.mass = r[1];
    m.m1_r = r[2];
    m.m2_r = r[3];
    m.energy = r[4];
    if (m.mass > 0.0) m.m2_r_centered = m.m2_r - m.m1_r * m.m1_r / m.mass;
    out.push_back(m);
  }
  return out;
}

void write_series(const std::filesystem::path& path, const std::string& x_name, const std::string& y_name,
                  std::span<const std::pair<double, double>> series) {
  auto out = open_out(path);
  out << x_name << ',' << y_name << '\n';
  for (const auto& [x, y] : series) out << num(x) << ',' << num(y) << '\n';
  close_out(out, path);
}

}  // namespace elo::io
