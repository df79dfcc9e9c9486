#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "locbound/config.hpp"
#include "locbound/errors.hpp"
#include "locbound/runner.hpp"

namespace {

int run_cli(int argc, char** argv) {
  CLI::App app{"locbound: localization error bounds and ML simulation for random sensor "
               "networks"};
  app.set_version_flag("--version", locbound::runner::kToolVersion);

  std::string mode_name;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;

  app.add_option("mode", mode_name, "bounds | avg-crb | ml-sim | verify")->required();
  app.add_option("--config", config_path, "experiment config file (key=value lines)")
      ->required();
  app.add_option("--seed", seed, "override master_seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_path, "override output CSV path");
  app.add_option("--workers", workers, "worker threads for trial-level parallelism")
      ->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::ifstream file(config_path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return 3;
  }
  std::ostringstream text;
  text << file.rdbuf();

  locbound::config::ExperimentConfig cfg;
  try {
    cfg = locbound::config::parse_config(text.str());
    const auto cli_mode = locbound::config::mode_from_name(mode_name);
    if (cfg.mode_set && cfg.mode != cli_mode) {
      std::cerr << "error: config sets mode=" << locbound::config::mode_name(cfg.mode)
                << " but the command line asks for " << mode_name << "\n";
      return 1;
    }
    cfg.mode = cli_mode;
    cfg.mode_set = true;
  } catch (const locbound::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (seed_given) cfg.master_seed = seed;
  if (!out_path.empty()) cfg.out = out_path;
  if (workers > 0) cfg.workers = workers;

  try {
    return locbound::runner::run(cfg, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
