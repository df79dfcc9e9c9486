#include "locbound/sweep.hpp"

#include <cmath>
#include <stdexcept>

namespace locbound::sweep {

const char* name(Param p) {
  switch (p) {
    case Param::kSnrDb: return "snr_db";
    case Param::kLambda: return "lambda";
    case Param::kGamma: return "gamma";
    case Param::kTDur: return "t_dur";
  }
  return "?";
}

Param param_from_name(const std::string& s) {
  if (s == "snr_db") return Param::kSnrDb;
  if (s == "lambda") return Param::kLambda;
  if (s == "gamma") return Param::kGamma;
  if (s == "t_dur") return Param::kTDur;
  throw std::invalid_argument("unknown sweep parameter '" + s +
                              "' (expected snr_db, lambda, gamma, or t_dur)");
}

PointParams apply(const PointParams& base, Param p, double value) {
  switch (p) {
    case Param::kSnrDb: {
      const double rho = model::snr_from_db(value);
      model::Pulse pulse(base.pulse.t_dur, base.pulse.es, base.pulse.es / (2.0 * rho));
      model::ChannelParams ch(base.ch.gamma, base.ch.c, base.ch.we, rho);
      return PointParams{ch, pulse, base.lambda};
    }
    case Param::kLambda:
      return PointParams{base.ch, base.pulse, value};
    case Param::kGamma: {
      model::ChannelParams ch(value, base.ch.c, base.ch.we, base.ch.rho);
      return PointParams{ch, base.pulse, base.lambda};
    }
    case Param::kTDur: {
      model::Pulse pulse(value, base.pulse.es, base.pulse.n0);
      model::ChannelParams ch(base.ch.gamma, base.ch.c, model::effective_bandwidth(pulse),
                              base.ch.rho);
      return PointParams{ch, pulse, base.lambda};
    }
  }
  throw std::logic_error("apply: unreachable");
}

std::vector<double> spaced_values(double start, double stop, int points, bool log_scale) {
  if (points < 1) throw std::invalid_argument("spaced_values: points must be >= 1");
  if (log_scale && !(start > 0.0 && stop > 0.0)) {
    throw std::invalid_argument("spaced_values: log scale needs positive endpoints");
  }
  std::vector<double> out;
  out.reserve(points);
  if (points == 1) {
    out.push_back(start);
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    if (log_scale) {
      out.push_back(std::exp(std::log(start) + t * (std::log(stop) - std::log(start))));
    } else {
      out.push_back(start + t * (stop - start));
    }
  }
  return out;
}

}  // namespace locbound::sweep
