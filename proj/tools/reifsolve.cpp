// reifsolve command line: one experiment per process. Subcommands mirror the
// experiment names; the config's [experiment] name must match the subcommand.
// Exit codes: 0 success (verification reports that fail are data, not errors),
// 2 config error, 3 numerical invariant violation, 4 non-convergence.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "reifsolve/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"reifsolve: nonlocal elliptic boundary-regularity laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long seed = 1;
  int threads = 1;

  const std::vector<std::string> names = {
      "solve",          "verify-indicator", "verify-delta-eps", "verify-comparison",
      "measure-exponent", "reifenberg",     "corkscrew",        "gmt",
      "eta-sweep"};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file (key = value sections)")->required();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker cap");
    sub->add_option("--out", out_dir, "output directory");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string chosen = app.get_subcommands().front()->get_name();

  // REIFSOLVE_OUT overrides --out
  if (const char* env = std::getenv("REIFSOLVE_OUT")) out_dir = env;

  try {
    auto cfg = reif::Config::parse_file(config_path);
    cfg.validate();
    if (cfg.experiment() != chosen) {
      std::cerr << "config error: [experiment] name '" << cfg.experiment()
                << "' does not match subcommand '" << chosen << "'\n";
      return 2;
    }
    // --seed wins; otherwise the config's [experiment] seed; otherwise 1
    if (app.get_subcommands().front()->count("--seed") == 0)
      seed = cfg.get_long("experiment", "seed", seed);
    return reif::run_experiment(cfg, out_dir, static_cast<uint64_t>(seed), threads);
  } catch (const reif::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
