#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fronts.hpp"
#include "model.hpp"

namespace pfront {

struct ConfigKey {
  std::string section;
  std::string key;
  std::string default_value;
  std::string doc;
};

/// Every accepted key with its default; anything else is rejected.
const std::vector<ConfigKey>& config_schema();
std::string config_help();

const std::vector<std::string>& scenario_names();

/// Flat sectioned key-value configuration with defaults filled in.
class ExperimentConfig {
 public:
  std::string scenario;

  const std::string& get(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  int integer(const std::string& section, const std::string& key) const;
  bool flag(const std::string& section, const std::string& key) const;
  std::vector<double> list(const std::string& section, const std::string& key) const;
  bool given(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  // Sorted "section.key=value" lines; input to the hash.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

 private:
  friend ExperimentConfig parse_config(const std::string&, const std::string&);
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> given_;
};

/// Parses INI text. `scenario` (from the subcommand) overrides run.scenario
/// when non-empty; a conflicting run.scenario is an error.
ExperimentConfig parse_config(const std::string& text, const std::string& scenario = "");
ExperimentConfig load_config(const std::string& path, const std::string& scenario = "");

ProblemInstance build_instance(const ExperimentConfig& cfg);
FrontConfig build_front_config(const ExperimentConfig& cfg);

struct QuenchRecord {
  double lambda = 0.0;
  FrontStatus status = FrontStatus::Inconclusive;
  double c = 0.0;
  double uncertainty = 0.0;
  double stationary_residual = std::nan("");
  std::string error;
};

struct QuenchScan {
  std::vector<QuenchRecord> records;  // ascending lambda
  bool nonincreasing = true;          // |c| along increasing |lambda|, within uncertainty
  bool stationary_consistent = true;  // every Stationary record has residual < 1e-6
  bool pinning_seen = false;          // a Stationary record occurred
};

QuenchScan quench_scan(double delta, double mu, std::vector<double> lambdas, const FrontConfig& cfg,
                       int workers = 1);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 numerical failure, 2 configuration error
  std::vector<std::string> summary;
  std::vector<std::string> artifacts;
  std::string error;
  // "", "config", "precondition", "numerical", "io" or "internal"
  std::string error_kind;
};

/// Runs the configured scenario and writes artifacts under out_dir.
RunResult run_scenario(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace pfront
