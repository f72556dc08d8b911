#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "driver.hpp"
#include "helpers.hpp"

using namespace pfront;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kEigen = R"(
; periodic eigenvalue of a constant state
[run]
scenario = eigen
[profile]
family = cubic   # inline comments are allowed
theta = 0.3
[eigen]
mode = periodic
state = constant
state_value = 0.3
)";

}  // namespace

TEST_CASE("defaults are filled in from the schema") {
  const ExperimentConfig c = parse_config("[profile]\nfamily = cubic\n", "front");
  CHECK(c.scenario == "front");
  CHECK(c.number("numerics", "dt") == 0.0);  // automatic
  CHECK(c.number("numerics", "tol_puls") == doctest::Approx(1e-3));
  CHECK(c.get("profile", "family") == "cubic");
  CHECK(c.given("profile", "family"));
  CHECK_FALSE(c.given("numerics", "dt"));
  for (const auto& k : config_schema()) CHECK_NOTHROW(c.get(k.section, k.key));
  CHECK(config_help().find("[numerics]") != std::string::npos);
  CHECK(config_help().find("nodes_per_period") != std::string::npos);
  CHECK(scenario_names().size() == 8);
}

TEST_CASE("configuration errors carry the offending key") {
  try {
    parse_config("[profile]\nfamily = cubic\nthetaa = 0.3\n", "front");
    FAIL("accepted an unknown key");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "profile.thetaa");
  }
  try {
    parse_config("[profiles]\nfamily = cubic\n", "front");
    FAIL("accepted an unknown section");
  } catch (const ConfigError& e) {
    CHECK(e.key().rfind("profiles", 0) == 0);
  }
  try {
    parse_config("[numerics]\ndt = 0.01\n", "front");
    FAIL("built an instance without a profile");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "profile.family");
  }
  CHECK_THROWS_AS(parse_config("[run]\nscenario = eigen\n[profile]\nfamily = cubic\n", "front"), ConfigError);
  CHECK_THROWS_AS(parse_config("[profile]\nfamily = cubic\n", "nonsense"), ConfigError);
  CHECK_THROWS_AS(parse_config("[numerics]\ndt = fast\n[profile]\nfamily=cubic\n", "front").number("numerics", "dt"),
                  ConfigError);
}

TEST_CASE("config hash") {
  const ExperimentConfig a = parse_config("[profile]\nfamily = cubic\ntheta = 0.3\n", "front");
  const ExperimentConfig b = parse_config("; a comment\n[profile]\ntheta=0.3\nfamily=cubic\n[run]\nworkers = 7\n", "front");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash_hex().size() == 16);
  ExperimentConfig c = a;
  c.set("profile", "theta", "0.31");
  CHECK(c.hash() != a.hash());
  CHECK(a.canonical().find("profile.theta=0.3") != std::string::npos);
  CHECK(a.canonical().find("run.workers") == std::string::npos);
}

TEST_CASE("eigen scenario echoes the constant potential") {
  const std::string dir = testing::temp_dir("driver_eigen");
  const ExperimentConfig cfg = parse_config(kEigen);
  const RunResult r = run_scenario(cfg, dir);
  REQUIRE(r.exit_code == 0);
  REQUIRE_FALSE(r.summary.empty());
  const std::string& line = r.summary.back();
  CHECK(line.find("eigen periodic lambda1=0.21") != std::string::npos);
  CHECK(line.find("q=0.21") != std::string::npos);
  CHECK(line.find("class=unstable") != std::string::npos);
  const std::string dat = slurp(dir + "/eigen_periodic.dat");
  CHECK(dat.rfind("# config_hash=" + cfg.hash_hex() + " scenario=eigen", 0) == 0);
  CHECK(std::filesystem::exists(dir + "/summary.txt"));

  // Same inputs, byte-identical artifacts.
  const std::string dir2 = testing::temp_dir("driver_eigen2");
  REQUIRE(run_scenario(cfg, dir2).exit_code == 0);
  CHECK(slurp(dir2 + "/eigen_periodic.dat") == dat);
  CHECK(slurp(dir2 + "/summary.txt") == slurp(dir + "/summary.txt"));
}

TEST_CASE("run_scenario exit codes") {
  const std::string dir = testing::temp_dir("driver_codes");
  ExperimentConfig bad = parse_config("[profile]\nfamily = cubic\n[numerics]\nscheme = leapfrog\n", "front");
  const RunResult r = run_scenario(bad, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.error_kind == "config");
  CHECK(r.error.find("numerics.scheme") != std::string::npos);

  ExperimentConfig sym = parse_config("[profile]\nfamily = cubic\ntheta = 0.5\n", "stability");
  const RunResult s = run_scenario(sym, dir);
  CHECK(s.exit_code == 1);
  CHECK(s.error_kind == "precondition");
}

TEST_CASE("front scenario artifacts") {
  const std::string dir = testing::temp_dir("driver_front");
  const RunResult r = run_scenario(parse_config("[profile]\nfamily = cubic\ntheta = 0.3\n", "front"), dir);
  REQUIRE(r.exit_code == 0);
  for (const char* name : {"front_profile.dat", "front_level.dat", "front_probes.dat", "front.json"})
    CHECK(std::filesystem::exists(dir + "/" + name));
  CHECK(slurp(dir + "/front.json").find("\"config_hash\"") != std::string::npos);
}

TEST_CASE("quench scan orders its records") {
  FrontConfig fc;
  const QuenchScan q = quench_scan(0.2, 0.3, {2.0, 0.0}, fc, 2);
  REQUIRE(q.records.size() == 2);
  CHECK(q.records[0].lambda == 0.0);
  CHECK(q.records[1].lambda == 2.0);
  CHECK(q.stationary_consistent);
  CHECK(q.nonincreasing);
  // |delta lambda| >= 1 is recorded per point, not thrown.
  const QuenchScan bad = quench_scan(0.2, 0.3, {6.0}, fc);
  CHECK_FALSE(bad.records[0].error.empty());
}
