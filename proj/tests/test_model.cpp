#include "locbound/model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "locbound/rng.hpp"

using namespace locbound::model;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kC = 3e8;

double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

// Trapezoid integral of s(t) s(t - delta) over the overlap, independent of
// the closed form under test.
double autocorr_by_trapezoid(double delta, const Pulse& p, int points) {
  const double amp_sq = 2.0 * p.es / (3.0 * p.t_dur);  // k0^2 A^2 with energy folded in
  const double w = 2.0 * kPi / p.t_dur;
  const double lo = std::max(0.0, delta);
  const double hi = std::min(p.t_dur, p.t_dur + delta);
  if (hi <= lo) return 0.0;
  const double h = (hi - lo) / points;
  double sum = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double t = lo + i * h;
    const double v = (1.0 - std::cos(w * t)) * (1.0 - std::cos(w * (t - delta)));
    sum += (i == 0 || i == points) ? 0.5 * v : v;
  }
  return amp_sq * sum * h;
}

}  // namespace

TEST_CASE("parameter invariants are enforced at construction") {
  CHECK_THROWS_AS(ChannelParams(2.0, kC, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams(1.5, kC, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams(4.0, -1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams(4.0, kC, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams(4.0, kC, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Pulse(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Pulse(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Pulse(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("effective bandwidth of the raised-cosine pulse") {
  CHECK(rel_err(effective_bandwidth(Pulse(1.0, 1.0, 1.0)), 13.159472534785811) < 1e-14);
  CHECK(rel_err(effective_bandwidth(Pulse(1e-6, 1.0, 1.0)), 13.159472534785811e12) < 1e-14);
  // Doubling the duration divides the bandwidth by exactly four.
  const double w1 = effective_bandwidth(Pulse(2.5e-7, 1.0, 1.0));
  const double w2 = effective_bandwidth(Pulse(5e-7, 1.0, 1.0));
  CHECK(w1 == 4.0 * w2);
}

TEST_CASE("information kernel values") {
  CHECK(g_kernel(1.0, ChannelParams(4.0, kC, 0.0, 1.0)) == 16.0);
  // gamma^2 * d^(-gamma-2) at d=2, gamma=2.5.
  CHECK(rel_err(g_kernel(2.0, ChannelParams(2.5, kC, 0.0, 1.0)), 0.27621358640099514) < 1e-14);
  // we = c^2/4 makes the bandwidth term exactly 1 at unit distance.
  CHECK(g_kernel(1.0, ChannelParams(4.0, kC, kC * kC / 4.0, 1.0)) == 17.0);
  CHECK_THROWS_AS(g_kernel(0.0, ChannelParams(4.0, kC, 0.0, 1.0)), std::domain_error);
  CHECK_THROWS_AS(g_kernel(-2.0, ChannelParams(4.0, kC, 0.0, 1.0)), std::domain_error);
}

TEST_CASE("kernel is strictly decreasing in distance") {
  locbound::rng::Stream stream(99);
  for (int rep = 0; rep < 25; ++rep) {
    const ChannelParams ch(2.2 + 4.0 * stream.uniform01(), kC,
                           stream.uniform01() * 1e13, 1.0 + stream.uniform01());
    double prev = g_kernel(0.05, ch);
    for (double d = 0.1; d < 300.0; d *= 1.7) {
      const double cur = g_kernel(d, ch);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("kernel limits when one term dominates by 100x") {
  const double gamma = 4.0;
  // Strength-only limit: pick d where gamma^2 >= 100 * bandwidth term.
  {
    const ChannelParams ch(gamma, kC, 1e10, 1.0);
    const double d = 1.0;  // 4*we*d^2/c^2 = 4.4e-7 << gamma^2
    CHECK(rel_err(g_kernel(d, ch), gamma * gamma * std::pow(d, -gamma - 2.0)) < 0.01);
  }
  // Arrival-time-only limit: bandwidth term 100x the gamma^2 term.
  {
    const ChannelParams ch(gamma, kC, 1e16, 1.0);
    const double d = 100.0;  // 4*we*d^2/c^2 = 4444 >> 16
    CHECK(rel_err(g_kernel(d, ch), 4.0 * ch.we / (kC * kC) * std::pow(d, -gamma)) < 0.01);
  }
}

TEST_CASE("pulse autocorrelation closed form") {
  const Pulse p(1e-6, 2.5, 1e-3);
  CHECK(pulse_autocorr(0.0, p) == p.es);
  CHECK(pulse_autocorr(p.t_dur, p) == 0.0);
  CHECK(pulse_autocorr(-2.0 * p.t_dur, p) == 0.0);
  // Half-duration lag collapses to es/6.
  CHECK(rel_err(pulse_autocorr(0.5 * p.t_dur, p), p.es / 6.0) < 1e-12);
}

TEST_CASE("pulse autocorrelation agrees with numeric integration") {
  const Pulse p(2e-6, 1.7, 1e-3);
  for (const double frac : {0.1, 0.25, 0.5, 0.77, 0.93, -0.33, -0.64}) {
    const double delta = frac * p.t_dur;
    const double oracle = autocorr_by_trapezoid(delta, p, 100000);
    CHECK(rel_err(pulse_autocorr(delta, p), oracle) < 1e-7);
  }
}

TEST_CASE("pulse autocorrelation symmetry and peak") {
  const Pulse p(1e-6, 1.0, 1e-3);
  locbound::rng::Stream stream(5);
  for (int i = 0; i < 100; ++i) {
    const double delta = (2.0 * stream.uniform01() - 1.0) * 1.2 * p.t_dur;
    CHECK(pulse_autocorr(delta, p) == pulse_autocorr(-delta, p));
    if (delta != 0.0) CHECK(pulse_autocorr(delta, p) < pulse_autocorr(0.0, p));
  }
}

TEST_CASE("autocorrelation slope vanishes at zero lag") {
  // A flat peak at zero lag is what makes the strength and timing parts of
  // the Fisher information decouple. Quadratic falloff: C(0) - C(h) ~ h^2.
  const Pulse p(1e-6, 1.0, 1e-3);
  const double h = 1e-4 * p.t_dur;
  const double drop = pulse_autocorr(0.0, p) - pulse_autocorr(h, p);
  CHECK(drop >= 0.0);
  CHECK(drop < 1e-7 * p.es);  // a nonzero slope would leave ~1e-4 * es here
}

TEST_CASE("dB conversion") {
  CHECK(snr_from_db(0.0) == 1.0);
  CHECK(rel_err(snr_from_db(50.0), 1e5) < 1e-14);
  CHECK(rel_err(snr_from_db(54.0), std::pow(10.0, 5.4)) < 1e-14);
  CHECK_THROWS_AS(snr_from_db(std::numeric_limits<double>::infinity()), std::domain_error);
}
