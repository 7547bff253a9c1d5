#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "elo/errors.hpp"
#include "elo/experiment.hpp"

using namespace elo;
using namespace elo::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("eloteams_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// Runs the CLI and returns its exit status; stdout goes to `log`.
int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ELOTEAMS_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config text round trip") {
  auto cfg = preset_config("fig7-nu-sweep");
  cfg.seed = 123456789012345ULL;
  cfg.kernel = InteractionKernel::indicator(2.5);
  cfg.gamma = 1.0 / 3.0;
  cfg.initial_rating = 6.5;
  const auto text = to_config_text(cfg);
  ExperimentConfig back;
  apply_config_text(back, text);
  CHECK(to_config_text(back) == text);
  CHECK(back.gamma == cfg.gamma);
  CHECK(back.sweep == cfg.sweep);
  CHECK(back.kernel.cutoff() == 2.5);
}

TEST_CASE("config parsing errors") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(apply_config_text(cfg, "dt = 0.1"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "n_teams = ten"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "n_teams = 2.5"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "mode = sideways"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "just words"), ConfigError);
  apply_config_text(cfg, "# comment\nsteps = 1e4   # trailing\n\n");
  CHECK(cfg.steps == 10000);
  CHECK_THROWS_AS(preset_config("fig99"), ConfigError);
}

TEST_CASE("presets scale with paper_scale") {
  const auto desk = preset_config("r1");
  const auto paper = preset_config("r1", true);
  CHECK(desk.n_teams == 50);
  CHECK(paper.n_teams == 200);
  CHECK(paper.steps == 2000000);
  CHECK(preset_config("fig4-uniform", true).macro_dt == 1e-5);
  CHECK(preset_config("r1").effective_initial_rating() == 5.0);
  CHECK(preset_config("fig7-nu-sweep").effective_initial_rating() == 7.0);
}

TEST_CASE("check mode") {
  ExperimentConfig cfg;
  cfg.nu = 0.1;
  cfg.sigma = 2.0;
  CHECK(run_check(cfg).all_passed());
  cfg.nu = 1.0;
  const auto bad = run_check(cfg);
  CHECK_FALSE(bad.all_passed());
  CHECK(bad.checks.front().detail.find("first violation") != std::string::npos);
}

TEST_CASE("unwritable output directory is a config error") {
  auto cfg = preset_config("r1");
  cfg.steps = 10;
  const auto dir = scratch_dir("blocked");
  { std::ofstream(dir.string()) << "file, not a directory"; }
  CHECK_THROWS_AS(run_experiment(cfg, dir / "sub"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("custom micro run writes its artifacts") {
  ExperimentConfig cfg;
  cfg.mode = Mode::Micro;
  cfg.n_teams = 10;
  cfg.steps = 200;
  cfg.realizations = 2;
  cfg.snapshot_stride = 50;
  cfg.write_trajectories = true;
  const auto dir = scratch_dir("custom");
  const auto report = run_experiment(cfg, dir);
  CHECK(report.all_passed());
  for (const char* name : {"scatter.csv", "trajectories.csv", "config.txt", "manifest.json", "verdict.txt"})
    CHECK(fs::exists(dir / name));
  fs::remove_all(dir);
}

TEST_CASE("custom macro2d run reports the energy verdict") {
  ExperimentConfig cfg;
  cfg.mode = Mode::Macro2d;
  cfg.nu = 0.1;
  cfg.sigma = 0.5;
  cfg.n_theta = 20;
  cfg.n_r = 20;
  cfg.macro_dt = 1e-2;
  cfg.t_end = 1.0;
  const auto dir = scratch_dir("macro2d");
  const auto report = run_experiment(cfg, dir);
  CHECK(report.all_passed());
  bool has_energy = false;
  for (const auto& c : report.checks) has_energy = has_energy || c.name == "energy_bound";
  CHECK(has_energy);
  fs::remove_all(dir);
}

TEST_CASE("cli: check subcommand") {
  const auto dir = scratch_dir("cli_check");
  fs::create_directories(dir);
  CHECK(cli("check --nu 0.1 --sigma 2", dir / "ok.txt") == kExitOk);
  CHECK(slurp(dir / "ok.txt").find("(B') holds") != std::string::npos);
  CHECK(slurp(dir / "ok.txt").find("min g'") != std::string::npos);
  CHECK(cli("check --nu 1 --sigma 2", dir / "bad.txt") == kExitCheckFailed);
  fs::remove_all(dir);
}

TEST_CASE("cli: exit codes for bad input") {
  const auto dir = scratch_dir("cli_errors");
  fs::create_directories(dir);
  CHECK(cli("run --preset nope --out " + (dir / "x").string(), dir / "a.txt") == kExitConfig);
  CHECK(cli("run --kernel wobbly --out " + (dir / "x").string(), dir / "b.txt") == kExitConfig);
  CHECK(cli("run --steps lots", dir / "c.txt") == kExitConfig);
  CHECK(cli("frobnicate", dir / "d.txt") == kExitConfig);
  CHECK(cli("run --mode macro2d --dt 5 --t-end 1 --nu 1 --out " + (dir / "y").string(), dir / "e.txt") == kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("cli: r1 preset is reproducible and the manifest reruns it") {
  const auto dir = scratch_dir("cli_r1");
  fs::create_directories(dir);
  const std::string base = "run --preset r1 --n-teams 50 --steps 1e3 --realizations 4 --seed 5 ";
  REQUIRE(cli(base + "--out " + (dir / "a").string(), dir / "a.txt") == kExitOk);
  REQUIRE(cli(base + "--threads 1 --out " + (dir / "b").string(), dir / "b.txt") == kExitOk);
  REQUIRE(cli("run --config " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "c").string(),
              dir / "c.txt") == kExitOk);
  REQUIRE(cli("run --config " + (dir / "a" / "config.txt").string() + " --out " + (dir / "d").string(),
              dir / "d.txt") == kExitOk);
  for (const char* name : {"scatter.csv", "slope_series.csv"}) {
    const auto a = slurp(dir / "a" / name);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(dir / "b" / name));
    CHECK(a == slurp(dir / "c" / name));
    CHECK(a == slurp(dir / "d" / name));
  }
  const auto manifest = slurp(dir / "a" / "manifest.json");
  CHECK(manifest.find("\"code_version\"") != std::string::npos);
  CHECK(manifest.find("\"wall_time_s\"") != std::string::npos);
  CHECK(manifest.find("\"scale_factors_to_paper\"") != std::string::npos);
  CHECK(slurp(dir / "a.txt").find("PASS compression_negative") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: analyze recomputes metrics from csv") {
  const auto dir = scratch_dir("cli_analyze");
  fs::create_directories(dir);
  REQUIRE(cli("run --mode macro --t-end 0.2 --dt 0.01 --out " + (dir / "m").string(), dir / "m.txt") == kExitOk);
  CHECK(cli("analyze --moments " + (dir / "m" / "moments.csv").string() + " --out " + (dir / "a").string(),
            dir / "a.txt") == kExitOk);
  CHECK(slurp(dir / "a" / "report.csv").find("mass_drift") != std::string::npos);
  CHECK(cli("analyze --out " + (dir / "b").string(), dir / "b.txt") == kExitConfig);
  fs::remove_all(dir);
}
