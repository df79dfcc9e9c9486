#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "locbound/mlsim.hpp"
#include "locbound/sweep.hpp"

namespace locbound::config {

enum class Mode { kBounds, kAvgCrb, kMlSim, kVerify };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& s);  // throws std::invalid_argument

/// Flat experiment description parsed from key=value text. Defaults follow
/// the reference scenario: lambda 0.01 m^-2, gamma 4, 50 dB SNR at one meter,
/// a 1 microsecond pulse, and a single sweep point.
struct ExperimentConfig {
  Mode mode = Mode::kBounds;
  bool mode_set = false;

  double gamma = 4.0;
  double snr_db = 50.0;
  double c = 3e8;
  double lambda = 0.01;
  double t_dur = 1e-6;
  double we = 0.0;          // explicit effective bandwidth (alternative to t_dur)
  bool we_explicit = false;

  int trials = 100;
  int sensors_per_trial = 1000;
  mlsim::GridSpec grid;
  bool noiseless = false;

  sweep::Param sweep_param = sweep::Param::kSnrDb;
  double sweep_start = 50.0;
  double sweep_stop = 50.0;
  int sweep_points = 1;
  bool sweep_log = false;

  std::uint64_t master_seed = 1;
  int workers = 1;
  std::string out;  // empty -> "<mode>.csv"

  /// Channel, pulse and density at the configured operating point (before any
  /// sweep substitution). The pulse energy is normalized to 1 J at one meter;
  /// the noise density follows from the SNR convention rho = Es / (2 N0).
  sweep::PointParams base_point() const;

  std::vector<double> sweep_values() const;
};

/// Parses and validates the key=value config format (one key per line, '#'
/// starts a comment). On failure throws ConfigError whose message lists every
/// violation with its line number.
ExperimentConfig parse_config(std::string_view text);

}  // namespace locbound::config
