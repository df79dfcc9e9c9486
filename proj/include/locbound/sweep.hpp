#pragma once

#include <string>
#include <vector>

#include "locbound/model.hpp"

namespace locbound::sweep {

enum class Param { kSnrDb, kLambda, kGamma, kTDur };

const char* name(Param p);

/// Parses "snr_db" | "lambda" | "gamma" | "t_dur"; throws std::invalid_argument
/// on anything else.
Param param_from_name(const std::string& s);

struct Spec {
  Param param = Param::kSnrDb;
  std::vector<double> values;
};

/// The full parameter point an experiment runs at.
struct PointParams {
  model::ChannelParams ch;
  model::Pulse pulse;
  double lambda;
};

/// Returns `base` with one parameter replaced by `value`. Sweeping snr_db
/// rewrites rho and the noise density together (n0 = es / (2 rho)); sweeping
/// t_dur rewrites the pulse duration and the effective bandwidth together.
PointParams apply(const PointParams& base, Param p, double value);

/// points >= 1 values from start to stop, linearly or logarithmically spaced.
/// A single point lands on start.
std::vector<double> spaced_values(double start, double stop, int points, bool log_scale);

}  // namespace locbound::sweep
