#include "locbound/mlsim.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "locbound/bounds.hpp"
#include "locbound/crb.hpp"
#include "locbound/errors.hpp"
#include "locbound/rng.hpp"

using namespace locbound;
using namespace locbound::mlsim;
using geometry::SensorField;
using geometry::SourceLocation;
using model::ChannelParams;
using model::Pulse;

namespace {
constexpr double kC = 3e8;

SensorField make_field(std::vector<SensorField::Point> points) {
  SensorField field;
  field.lambda = 0.01;
  field.radius = 100.0;
  field.points = std::move(points);
  return field;
}

Pulse pulse_for_snr(double t_dur, double snr_db) {
  const double rho = model::snr_from_db(snr_db);
  return Pulse(t_dur, 1.0, 1.0 / (2.0 * rho));
}

ChannelParams channel_for(double gamma, const Pulse& pulse) {
  return ChannelParams(gamma, kC, model::effective_bandwidth(pulse),
                       pulse.es / (2.0 * pulse.n0));
}
}  // namespace

TEST_CASE("noiseless correlator equals the signal part exactly") {
  const auto field = make_field({{10.0, 0.0}, {-3.0, 7.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 50.0);
  const auto ch = channel_for(4.0, pulse);
  const SourceLocation src{0.0, 0.0};
  const std::vector<SourceLocation> cands = {src};
  const auto stats = sufficient_stats(field, src, cands, pulse, ch, 1, /*noise_scale=*/0.0);
  // At the true location the lag is zero, so the correlator is the full
  // pulse energy scaled by the amplitude path gain.
  CHECK(stats.correlator(0, 0) == std::pow(10.0, -2.0) * pulse.es);
  CHECK(stats.correlator(1, 0) == std::pow(std::hypot(3.0, 7.0), -2.0) * pulse.es);
}

TEST_CASE("candidates equidistant from a sensor share its noise exactly") {
  // Sensor on the mirror axis of two candidates: bit-identical delays, so the
  // noise components must coincide (one shared slot, not two draws).
  const auto field = make_field({{0.0, 5.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 20.0);
  const auto ch = channel_for(4.0, pulse);
  const std::vector<SourceLocation> cands = {{3.0, 4.0}, {-3.0, 4.0}};
  const auto stats = sufficient_stats(field, {0.1, 0.2}, cands, pulse, ch, 9);
  CHECK(stats.correlator(0, 0) == stats.correlator(0, 1));
}

TEST_CASE("repeated candidate locations map to one column") {
  const auto field = make_field({{10.0, 0.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 20.0);
  const auto ch = channel_for(4.0, pulse);
  SufficientStats stats(field, {0.0, 0.0}, pulse, ch, 3);
  const std::vector<SourceLocation> batch1 = {{1.0, 2.0}, {3.0, 4.0}};
  const std::vector<SourceLocation> batch2 = {{3.0, 4.0}, {5.0, 6.0}};
  const auto idx1 = stats.add_candidates(batch1);
  const auto idx2 = stats.add_candidates(batch2);
  CHECK(idx2[0] == idx1[1]);
  CHECK(stats.candidate_count() == 3);
}

TEST_CASE("correlator mean over many noise draws matches the signal part") {
  const auto field = make_field({{20.0, -5.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 10.0);
  const auto ch = channel_for(3.0, pulse);
  const SourceLocation src{0.0, 0.0};
  const std::vector<SourceLocation> cands = {{2.0, 1.0}};
  const int draws = 10000;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) {
    const auto stats = sufficient_stats(field, src, cands, pulse, ch, 100 + k);
    sum += stats.correlator(0, 0);
  }
  const auto clean = sufficient_stats(field, src, cands, pulse, ch, 0, 0.0);
  const double signal = clean.correlator(0, 0);
  const double sd = std::sqrt(0.5 * pulse.n0 * pulse.es);
  CHECK(std::fabs(sum / draws - signal) < 3.0 * sd / std::sqrt(double(draws)));
}

TEST_CASE("noise covariance across candidates matches the delay kernel") {
  // One sensor, four candidates at staggered ranges: the empirical covariance
  // of the noise must reproduce (N0/2) * C(delta tau) entry by entry.
  const auto field = make_field({{40.0, 0.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 0.0);
  const auto ch = channel_for(4.0, pulse);
  const SourceLocation src{0.0, 0.0};
  const std::vector<SourceLocation> cands = {
      {0.0, 0.0}, {25.0, 0.0}, {-60.0, 0.0}, {10.0, 5.0}};
  const int n_cand = 4;
  const int draws = 10000;

  const auto clean = sufficient_stats(field, src, cands, pulse, ch, 0, 0.0);
  std::vector<double> cov(n_cand * n_cand, 0.0);
  std::vector<double> noise(n_cand);
  for (int k = 0; k < draws; ++k) {
    const auto stats = sufficient_stats(field, src, cands, pulse, ch, 50000 + k);
    for (int i = 0; i < n_cand; ++i) {
      noise[i] = stats.correlator(0, i) - clean.correlator(0, i);
    }
    for (int i = 0; i < n_cand; ++i) {
      for (int j = 0; j < n_cand; ++j) cov[i * n_cand + j] += noise[i] * noise[j];
    }
  }
  std::vector<double> tau(n_cand);
  for (int i = 0; i < n_cand; ++i) {
    tau[i] = std::hypot(cands[i].x - 40.0, cands[i].y) / kC;
  }
  const double var0 = 0.5 * pulse.n0 * pulse.es;
  for (int i = 0; i < n_cand; ++i) {
    for (int j = 0; j < n_cand; ++j) {
      const double want = 0.5 * pulse.n0 * model::pulse_autocorr(tau[i] - tau[j], pulse);
      const double got = cov[i * n_cand + j] / draws;
      // Standard error of a Gaussian covariance estimate.
      const double se = std::sqrt((var0 * var0 + want * want) / draws);
      CHECK(std::fabs(got - want) < 5.0 * se);
    }
  }
}

TEST_CASE("log-likelihood is maximized at the truth without noise") {
  const auto field = make_field({{12.0, 3.0}, {-8.0, 6.0}, {1.0, -15.0}, {25.0, 20.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 40.0);
  const auto ch = channel_for(4.0, pulse);
  const SourceLocation src{0.5, -0.25};
  std::vector<SourceLocation> cands = {src};
  for (double x = -6.0; x <= 6.0; x += 1.5) {
    for (double y = -6.0; y <= 6.0; y += 1.5) {
      cands.push_back({src.x + x, src.y + y});
    }
  }
  const auto stats = sufficient_stats(field, src, cands, pulse, ch, 4, 0.0);
  const double at_truth = log_likelihood(src, stats, field, pulse, ch);
  for (std::size_t i = 0; i < stats.candidate_count(); ++i) {
    CHECK(at_truth >= stats.log_likelihood_at(i));
  }
}

TEST_CASE("log-likelihood scales exactly inversely with the noise density") {
  const auto field = make_field({{12.0, 3.0}, {-8.0, 6.0}});
  const Pulse base = pulse_for_snr(1e-6, 30.0);
  const Pulse doubled(base.t_dur, base.es, 2.0 * base.n0);
  const auto ch = channel_for(4.0, base);
  const SourceLocation src{0.0, 0.0};
  const std::vector<SourceLocation> cands = {{1.0, 1.0}, {-2.0, 0.5}};
  const auto s1 = sufficient_stats(field, src, cands, base, ch, 8, 0.0);
  const auto s2 = sufficient_stats(field, src, cands, doubled, ch, 8, 0.0);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    CHECK(s1.log_likelihood_at(i) == 2.0 * s2.log_likelihood_at(i));
  }
}

TEST_CASE("equal-delay candidates at a single sensor tie exactly") {
  const auto field = make_field({{0.0, 5.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 20.0);
  const auto ch = channel_for(4.0, pulse);
  const std::vector<SourceLocation> cands = {{3.0, 4.0}, {-3.0, 4.0}};
  const auto stats = sufficient_stats(field, {0.1, 0.2}, cands, pulse, ch, 11);
  CHECK(stats.log_likelihood_at(0) == stats.log_likelihood_at(1));
}

TEST_CASE("unknown candidate lookup fails loudly") {
  const auto field = make_field({{10.0, 0.0}});
  const Pulse pulse = pulse_for_snr(1e-6, 20.0);
  const auto ch = channel_for(4.0, pulse);
  const std::vector<SourceLocation> cands = {{1.0, 1.0}};
  const auto stats = sufficient_stats(field, {0.0, 0.0}, cands, pulse, ch, 5);
  CHECK_THROWS_AS(log_likelihood({2.0, 2.0}, stats, field, pulse, ch), std::out_of_range);
}

TEST_CASE("grid spec invariants") {
  GridSpec bad;
  bad.coarse_step = 40.0;  // larger than the half width
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = {};
  bad.refine_iters = 13;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("noiseless estimate returns an on-grid truth exactly") {
  const auto field = geometry::sample_ppp(0.02, 40.0, {0.0, 0.0}, 31337);
  REQUIRE(field.points.size() > 10);
  const Pulse pulse = pulse_for_snr(1e-6, 50.0);
  const auto ch = channel_for(4.0, pulse);
  GridSpec grid;
  grid.half_width = 12.0;
  grid.coarse_step = 3.0;
  grid.refine_iters = 4;
  const auto est = ml_estimate(field, {0.0, 0.0}, pulse, ch, grid, 77, /*noiseless=*/true);
  CHECK(est.x == 0.0);
  CHECK(est.y == 0.0);
}

TEST_CASE("estimates are deterministic in the seed") {
  const auto field = geometry::sample_ppp(0.02, 40.0, {0.0, 0.0}, 99);
  const Pulse pulse = pulse_for_snr(1e-6, 45.0);
  const auto ch = channel_for(4.0, pulse);
  GridSpec grid;
  grid.half_width = 10.0;
  grid.coarse_step = 2.5;
  grid.refine_iters = 3;
  const auto a = ml_estimate(field, {0.0, 0.0}, pulse, ch, grid, 123);
  const auto b = ml_estimate(field, {0.0, 0.0}, pulse, ch, grid, 123);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("translating the scene translates the estimate bit-exactly") {
  // Coordinates snapped to a dyadic lattice so the shifted sums are exact in
  // floating point; the noise streams key off sensor indices, not positions.
  const double snap = 1.0 / (1 << 20);
  auto field = geometry::sample_ppp(0.03, 30.0, {0.0, 0.0}, 2711);
  REQUIRE(field.points.size() > 8);
  for (auto& p : field.points) {
    p.a = std::round(p.a / snap) * snap;
    p.b = std::round(p.b / snap) * snap;
  }
  const Pulse pulse = pulse_for_snr(1e-6, 35.0);
  const auto ch = channel_for(4.0, pulse);
  GridSpec grid;
  grid.half_width = 10.0;
  grid.coarse_step = 2.0;
  grid.refine_iters = 4;

  const auto base = ml_estimate(field, {0.0, 0.0}, pulse, ch, grid, 555);

  const double dx = 64.0, dy = -32.0;
  auto shifted = field;
  for (auto& p : shifted.points) {
    p.a += dx;
    p.b += dy;
  }
  const auto moved = ml_estimate(shifted, {dx, dy}, pulse, ch, grid, 555);
  CHECK(moved.x == base.x + dx);
  CHECK(moved.y == base.y + dy);
}

TEST_CASE("high-SNR single-trial error is commensurate with the realization bound") {
  const double lambda = 0.01;
  const auto field = geometry::sample_ppp(
      lambda, geometry::radius_for_expected_count(60, lambda), {0.0, 0.0}, 424242);
  const Pulse pulse = pulse_for_snr(1e-6, 60.0);
  const auto ch = channel_for(4.0, pulse);
  const auto polars = geometry::polar_of(field, {0.0, 0.0});
  const double bound = crb::crb_realization(polars, ch);
  GridSpec grid;
  grid.half_width = 21.0;
  grid.coarse_step = 3.0;
  grid.refine_iters = 7;
  const auto est = ml_estimate(field, {0.0, 0.0}, pulse, ch, grid, 31);
  const double sq_err = est.x * est.x + est.y * est.y;
  CHECK(sq_err < 5.0 * bound);
}

TEST_CASE("mse curve: deterministic across worker counts, ordered against the bound") {
  const Pulse pulse = pulse_for_snr(1e-6, 50.0);
  const auto ch = channel_for(4.0, pulse);
  GridSpec grid;
  grid.half_width = 15.0;
  grid.coarse_step = 5.0;
  grid.refine_iters = 5;
  MlSimConfig cfg{ch, pulse, 0.01, 60, 12, grid, 2026, false, 1};
  sweep::Spec spec{sweep::Param::kSnrDb, {40.0, 50.0, 60.0}};

  const auto serial = run_mse(cfg, spec);
  cfg.workers = 3;
  const auto threaded = run_mse(cfg, spec);
  REQUIRE(serial.points.size() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(serial.points[p].mse == threaded.points[p].mse);
    CHECK(serial.points[p].avg_crb_mean == threaded.points[p].avg_crb_mean);
    // Bound ordering at statistical resolution.
    CHECK(serial.points[p].mse >=
          serial.points[p].crb_lb - 2.0 * serial.points[p].mse_stderr);
  }
  // Error does not get worse as the SNR rises.
  CHECK(serial.points[2].mse <=
        serial.points[0].mse +
            2.0 * (serial.points[0].mse_stderr + serial.points[2].mse_stderr));
}

TEST_CASE("single noiseless trial has zero error on a source-centered grid") {
  const Pulse pulse = pulse_for_snr(1e-6, 50.0);
  const auto ch = channel_for(4.0, pulse);
  GridSpec grid;
  grid.half_width = 12.0;
  grid.coarse_step = 4.0;
  grid.refine_iters = 3;
  MlSimConfig cfg{ch, pulse, 0.01, 50, 1, grid, 7, /*noiseless=*/true, 1};
  sweep::Spec spec{sweep::Param::kSnrDb, {50.0}};
  const auto curve = run_mse(cfg, spec);
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].mse == 0.0);
  CHECK(curve.points[0].excluded == 0);
}
