#pragma once

// Config files: INI-style sections of key = value pairs with a closed key
// schema (unknown sections or keys are rejected). The same machinery backs
// every CLI subcommand.

#include <map>
#include <string>
#include <vector>

#include "reifsolve/geometry.hpp"
#include "reifsolve/kernels.hpp"
#include "reifsolve/quadrature.hpp"

namespace reif {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  const std::string& raw() const { return raw_; }
  // throws ConfigError on unknown sections, unknown keys, or a bad experiment
  void validate() const;
  std::string experiment() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string raw_;
};

KernelSpec build_kernel(const Config& cfg);
DomainOracle build_domain(const Config& cfg);
PVQuadrature build_quadrature(const Config& cfg);

struct GridSpec {
  double box_halfwidth = 1.0;
  double h = 1.0 / 32.0;
  double region_radius = std::numeric_limits<double>::infinity();
};
GridSpec build_grid_spec(const Config& cfg);

// Runs the configured experiment; returns the process exit code
// (0 success, 3 numerical invariant violation, 4 non-convergence; verification
// reports that fail are still success, the failure lands in the CSVs).
int run_experiment(const Config& cfg, const std::string& out_dir, uint64_t seed, int threads);

}  // namespace reif
