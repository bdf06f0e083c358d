#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "reifsolve/config.hpp"
#include "reifsolve/io.hpp"

using namespace reif;
namespace fs = std::filesystem;

namespace {

const char* kSolveConfig = R"(
[kernel]
family = isotropic
n = 2
s = 0.5

[domain]
kind = ball
radius = 1.0

[grid]
box_halfwidth = 1.0
h = 0.125

[experiment]
name = solve
f_const = 1.0
tol = 1e-8
)";

std::string fresh_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("reifsolve_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::map<std::string, std::string> read_manifest(const std::string& dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_file(dir + "/manifest.txt"));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing: sections, comments, values") {
  auto cfg = Config::parse_text("[kernel]\ns = 0.7 # comment\n[experiment]\nname = solve\n");
  CHECK(cfg.get_double("kernel", "s", 0.0) == 0.7);
  CHECK(cfg.experiment() == "solve");
  CHECK(cfg.get("missing", "key", "fallback") == "fallback");
}

TEST_CASE("config parsing rejects malformed input") {
  CHECK_THROWS_AS(Config::parse_text("[kernel\ns = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_text("s = 1\n"), ConfigError);  // key outside a section
  CHECK_THROWS_AS(Config::parse_text("[a]\nnovalue\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_text("[a]\nk = 1\nk = 2\n"), ConfigError);  // duplicate
}

TEST_CASE("validation enforces the closed key schema") {
  CHECK_THROWS_AS(Config::parse_text("[mystery]\nk = 1\n[experiment]\nname = solve\n").validate(),
                  ConfigError);
  CHECK_THROWS_AS(
      Config::parse_text("[kernel]\nwhatever = 1\n[experiment]\nname = solve\n").validate(),
      ConfigError);
  CHECK_THROWS_AS(Config::parse_text("[experiment]\nname = dance\n").validate(), ConfigError);
  CHECK_THROWS_AS(Config::parse_text("[experiment]\nname = solve\nr0 = 1\n").validate(),
                  ConfigError);  // r0 belongs to reifenberg, not solve
  CHECK_THROWS_AS(Config::parse_text("[kernel]\ns = two\n[experiment]\nname = solve\n").validate(),
                  ConfigError);
  // a complete valid config passes
  Config::parse_text(kSolveConfig).validate();
}

TEST_CASE("solve experiment writes artifacts and is byte-reproducible") {
  auto cfg = Config::parse_text(kSolveConfig);
  const auto dir1 = fresh_dir("solve1");
  CHECK(run_experiment(cfg, dir1, 7, 2) == 0);
  REQUIRE(fs::exists(dir1 + "/u.csv"));
  REQUIRE(fs::exists(dir1 + "/manifest.txt"));
  auto man = read_manifest(dir1);
  CHECK(std::stod(man.at("residual")) <= std::stod(man.at("residual_target")));

  const auto dir2 = fresh_dir("solve2");
  CHECK(run_experiment(cfg, dir2, 7, 2) == 0);
  CHECK(read_file(dir1 + "/u.csv") == read_file(dir2 + "/u.csv"));

  // manifest hash tracks the config bytes
  auto cfg2 = Config::parse_text(std::string(kSolveConfig) + "\n# trailing note\n");
  const auto dir3 = fresh_dir("solve3");
  CHECK(run_experiment(cfg2, dir3, 7, 2) == 0);
  CHECK(read_manifest(dir1).at("config_hash") == read_manifest(dir2).at("config_hash"));
  CHECK(read_manifest(dir1).at("config_hash") != read_manifest(dir3).at("config_hash"));
}

TEST_CASE("reifenberg experiment emits per-(x, r) rows and eta_hat") {
  auto cfg = Config::parse_text(R"(
[domain]
kind = half_space

[experiment]
name = reifenberg
r0 = 0.5
n_points = 6
n_scales = 3
samples_per_ball = 400
)");
  const auto dir = fresh_dir("reif");
  CHECK(run_experiment(cfg, dir, 11, 1) == 0);
  const auto csv = read_file(dir + "/report.csv");
  CHECK(csv.rfind("x1,x2,r,defect,separation_ok\n", 0) == 0);
  CHECK(std::stod(read_manifest(dir).at("eta_hat")) <= 0.02);
}

TEST_CASE("gmt experiment emits (r, ratio, ci) rows") {
  auto cfg = Config::parse_text(R"(
[domain]
kind = half_space

[experiment]
name = gmt
rho = 1.0
r_values = 0.1, 0.2
n_samples = 2000
)");
  const auto dir = fresh_dir("gmt");
  CHECK(run_experiment(cfg, dir, 13, 1) == 0);
  CHECK(read_file(dir + "/ratio.csv").rfind("r,ratio,ci\n", 0) == 0);
}

TEST_CASE("exit codes: non-convergence and invariant violations") {
  // max_iter too small: exit 4 with the error recorded in the manifest
  auto cfg4 = Config::parse_text(std::string(kSolveConfig) + "max_iter = 1\n");
  const auto dir4 = fresh_dir("code4");
  CHECK(run_experiment(cfg4, dir4, 1, 1) == 4);
  CHECK(read_manifest(dir4).count("error") == 1);

  // grid that cannot resolve the koch features: exit 3
  auto cfg3 = Config::parse_text(R"(
[domain]
kind = koch_flat
depth = 5
angle = 0.05

[grid]
h = 0.0625

[experiment]
name = solve
)");
  const auto dir3 = fresh_dir("code3");
  CHECK(run_experiment(cfg3, dir3, 1, 1) == 3);
}


TEST_CASE("a failing verification report still exits zero") {
  // failure is data: the report lands in the CSVs, the process succeeds
  auto cfg = Config::parse_text(R"(
[kernel]
family = isotropic
s = 0.5

[domain]
kind = ball_complement
eta = 0.05

[experiment]
name = verify-delta-eps
eps = 0.8
n_points = 20
R = 1.0
kappa = 0.125
)");
  const auto dir = fresh_dir("reportfail");
  CHECK(run_experiment(cfg, dir, 3, 1) == 0);
  CHECK(read_manifest(dir).at("pass") == "0");
}


TEST_CASE("corkscrew and measure-exponent experiments run end to end") {
  {
    auto cfg = Config::parse_text(R"(
[domain]
kind = half_space

[experiment]
name = corkscrew
R = 1.0
kappa = 0.4
n_boundary = 4
n_scales = 3
)");
    const auto dir = fresh_dir("cork");
    CHECK(run_experiment(cfg, dir, 5, 1) == 0);
    auto man = read_manifest(dir);
    CHECK(man.at("ok") == "1");
    CHECK(std::stod(man.at("worst_margin")) == doctest::Approx(0.1).epsilon(1e-6));
  }
  {
    auto cfg = Config::parse_text(R"(
[domain]
kind = ball
radius = 1.0

[grid]
h = 0.03125

[experiment]
name = measure-exponent
r_max = 0.5
n_radii = 8
)");
    const auto dir = fresh_dir("exponent");
    CHECK(run_experiment(cfg, dir, 5, 2) == 0);
    CHECK(fs::exists(dir + "/growth.csv"));
    const double alpha = std::stod(read_manifest(dir).at("alpha"));
    CHECK(alpha > 0.2);
    CHECK(alpha < 0.9);
  }
}

TEST_CASE("eta-sweep experiment emits one row per eta") {
  auto cfg = Config::parse_text(R"(
[domain]
kind = koch_flat
depth = 3

[grid]
box_halfwidth = 1.0
h = 0.03125

[experiment]
name = eta-sweep
etas = 0.1, 0.05
r_max = 0.25
n_radii = 6
)");
  const auto dir = fresh_dir("sweep");
  CHECK(run_experiment(cfg, dir, 5, 2) == 0);
  const auto csv = read_file(dir + "/alpha_vs_eta.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
}

TEST_CASE("verify-comparison experiment with explicit parameters") {
  auto cfg = Config::parse_text(R"(
[domain]
kind = half_space

[grid]
box_halfwidth = 0.35
h = 0.03125

[experiment]
name = verify-comparison
levels = 0
rho = 0.05
sigma = 0.0003
eps = 0.005
f_auto = 1
)");
  const auto dir = fresh_dir("comparison");
  CHECK(run_experiment(cfg, dir, 5, 2) == 0);
  REQUIRE(fs::exists(dir + "/levels.csv"));
  REQUIRE(fs::exists(dir + "/params.json"));
  CHECK(read_manifest(dir).at("pass") == "1");
}

#ifdef REIFSOLVE_BIN
TEST_CASE("binary: REIFSOLVE_OUT overrides --out and bad configs exit 2") {
  const auto dir = fresh_dir("bin");
  const auto cfg_path = dir + "/solve.cfg";
  {
    std::ofstream out(cfg_path);
    out << kSolveConfig;
  }
  const auto out_env = fresh_dir("bin_env");
  std::string cmd = std::string("REIFSOLVE_OUT=") + out_env + " " + REIFSOLVE_BIN +
                    " solve --config " + cfg_path + " --out " + dir + "/ignored > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(out_env + "/u.csv"));
  CHECK_FALSE(fs::exists(dir + "/ignored/u.csv"));

  // config error -> exit 2
  const auto bad_path = dir + "/bad.cfg";
  {
    std::ofstream out(bad_path);
    out << "[experiment]\nname = solve\nbogus = 1\n";
  }
  std::string bad = std::string(REIFSOLVE_BIN) + " solve --config " + bad_path +
                    " > /dev/null 2>&1";
  const int rc = std::system(bad.c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  // subcommand mismatch -> exit 2
  std::string mismatch = std::string(REIFSOLVE_BIN) + " gmt --config " + cfg_path +
                         " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(mismatch.c_str())) == 2);
}
#endif

}  // TEST_SUITE
