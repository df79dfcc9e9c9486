#include "locbound/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace locbound::model {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

ChannelParams::ChannelParams(double gamma_in, double c_in, double we_in, double rho_in)
    : gamma(gamma_in), c(c_in), we(we_in), rho(rho_in) {
  require(std::isfinite(gamma) && gamma > 2.0, "ChannelParams: gamma must be > 2");
  require(std::isfinite(c) && c > 0.0, "ChannelParams: c must be > 0");
  require(std::isfinite(we) && we >= 0.0, "ChannelParams: we must be >= 0");
  require(std::isfinite(rho) && rho > 0.0, "ChannelParams: rho must be > 0");
}

Pulse::Pulse(double t_dur_in, double es_in, double n0_in)
    : t_dur(t_dur_in), es(es_in), n0(n0_in) {
  require(std::isfinite(t_dur) && t_dur > 0.0, "Pulse: t_dur must be > 0");
  require(std::isfinite(es) && es > 0.0, "Pulse: es must be > 0");
  require(std::isfinite(n0) && n0 > 0.0, "Pulse: n0 must be > 0");
}

double effective_bandwidth(const Pulse& p) {
  constexpr double pi = std::numbers::pi;
  return 4.0 * pi * pi / (3.0 * p.t_dur * p.t_dur);
}

double g_kernel(double d, const ChannelParams& ch) {
  if (!(d > 0.0)) {
    std::ostringstream msg;
    msg << "g_kernel: distance must be positive, got " << d;
    throw std::domain_error(msg.str());
  }
  const double bw_term = 4.0 * ch.we * d * d / (ch.c * ch.c);
  return std::pow(d, -ch.gamma - 2.0) * (ch.gamma * ch.gamma + bw_term);
}

double pulse_autocorr(double delta, const Pulse& p) {
  const double ad = std::fabs(delta);
  const double t = p.t_dur;
  if (ad >= t) return 0.0;
  // Overlap integral of (1 - cos) against its shifted copy:
  //   J(d) = (T - d) * (1 + cos(w d)/2) + 3 sin(w d) / (2 w),  w = 2 pi / T,
  // scaled so the zero-lag value equals the pulse energy.
  const double w = 2.0 * std::numbers::pi / t;
  const double overlap = t - ad;
  const double j = overlap * (1.0 + 0.5 * std::cos(w * ad)) + 1.5 * std::sin(w * ad) / w;
  return 2.0 * p.es / (3.0 * t) * j;
}

double snr_from_db(double db) {
  if (!std::isfinite(db)) throw std::domain_error("snr_from_db: dB value must be finite");
  return std::pow(10.0, db / 10.0);
}

}  // namespace locbound::model
