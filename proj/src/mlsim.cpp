#include "locbound/mlsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "locbound/bounds.hpp"
#include "locbound/crb.hpp"
#include "locbound/errors.hpp"
#include "locbound/numerics.hpp"
#include "locbound/parallel.hpp"
#include "locbound/rng.hpp"

namespace locbound::mlsim {

void validate(const GridSpec& grid) {
  if (!(grid.coarse_step > 0.0) || !(grid.half_width > grid.coarse_step)) {
    throw std::invalid_argument("GridSpec: need half_width > coarse_step > 0");
  }
  if (grid.refine_iters < 0 || grid.refine_iters > 12) {
    // Beyond ~12 halvings the candidate delays collapse below the covariance
    // nugget and the noise model degenerates.
    throw std::invalid_argument("GridSpec: refine_iters must be in [0, 12]");
  }
}

namespace {

struct LocationKey {
  std::uint64_t x_bits;
  std::uint64_t y_bits;
  bool operator==(const LocationKey&) const = default;
};

struct LocationKeyHash {
  std::size_t operator()(const LocationKey& k) const noexcept {
    return rng::mix64(k.x_bits ^ rng::mix64(k.y_bits));
  }
};

LocationKey key_of(geometry::SourceLocation loc) {
  return LocationKey{std::bit_cast<std::uint64_t>(loc.x), std::bit_cast<std::uint64_t>(loc.y)};
}

/// Per-sensor noise state: a Gaussian process over candidate delays, stored
/// as a growing packed-lower-triangular Cholesky factor plus the standard
/// normals that parameterize the realization. Appending delays draws the new
/// noise conditionally on everything drawn before.
struct SensorProcess {
  std::vector<double> delays;
  std::vector<double> chol;   // packed rows: row i occupies [i(i+1)/2, i(i+1)/2 + i]
  std::vector<double> z;      // standard normals, one per slot
  std::vector<double> noise;  // chol * z
  std::unordered_map<std::uint64_t, std::size_t> slot_by_delay;
  rng::Stream stream{0};
};

}  // namespace

struct SufficientStats::Impl {
  const geometry::SensorField* field = nullptr;
  model::Pulse pulse{1.0, 1.0, 1.0};
  model::ChannelParams ch{4.0, 3e8, 0.0, 1.0};
  double noise_scale = 1.0;
  double nugget = 0.0;  // added to the delay-covariance diagonal

  std::vector<double> true_dist;   // sensor -> source distance
  std::vector<double> true_amp;    // dist^(-gamma/2)
  std::vector<double> true_delay;  // dist / c

  std::vector<geometry::SourceLocation> candidates;
  std::unordered_map<LocationKey, std::size_t, LocationKeyHash> index_by_location;
  std::vector<std::vector<double>> dist_cols;  // [candidate][sensor]
  std::vector<std::vector<double>> y_cols;     // [candidate][sensor]

  std::vector<SensorProcess> procs;

  double covariance(double delta) const {
    double v = 0.5 * pulse.n0 * model::pulse_autocorr(delta, pulse);
    if (delta == 0.0) v += nugget;
    return v;
  }

  void extend_process(SensorProcess& proc, std::span<const double> new_delays);
};

void SufficientStats::Impl::extend_process(SensorProcess& proc,
                                           std::span<const double> new_delays) {
  const std::size_t n_old = proc.delays.size();
  const std::size_t k = new_delays.size();

  // Rows of the factor extension: solve L b^T = c^T for each new delay's
  // cross-covariance row c against the existing slots.
  std::vector<double> cross(k * n_old);
  for (std::size_t i = 0; i < k; ++i) {
    double* row = cross.data() + i * n_old;
    for (std::size_t j = 0; j < n_old; ++j) {
      row[j] = covariance(new_delays[i] - proc.delays[j]);
    }
    for (std::size_t j = 0; j < n_old; ++j) {
      const double* lrow = proc.chol.data() + j * (j + 1) / 2;
      double s = row[j];
      for (std::size_t t = 0; t < j; ++t) s -= lrow[t] * row[t];
      row[j] = s / lrow[j];
    }
  }

  // Schur complement of the new block, factored on its own.
  numerics::SquareMatrix schur(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = covariance(new_delays[i] - new_delays[j]);
      const double* bi = cross.data() + i * n_old;
      const double* bj = cross.data() + j * n_old;
      for (std::size_t t = 0; t < n_old; ++t) s -= bi[t] * bj[t];
      schur(i, j) = s;
      schur(j, i) = s;
    }
  }
  numerics::SquareMatrix ls;
  try {
    ls = numerics::cholesky(schur);
  } catch (const NotPsdError& e) {
    throw NotPsdError(std::string("delay covariance not positive definite after jitter "
                                  "(duplicate candidate delays should have been deduped): ") +
                      e.what());
  }

  proc.delays.insert(proc.delays.end(), new_delays.begin(), new_delays.end());
  proc.z.reserve(n_old + k);
  proc.noise.reserve(n_old + k);
  proc.chol.reserve((n_old + k) * (n_old + k + 1) / 2);
  for (std::size_t i = 0; i < k; ++i) {
    const double* bi = cross.data() + i * n_old;
    double value = 0.0;
    for (std::size_t t = 0; t < n_old; ++t) value += bi[t] * proc.z[t];
    const double zi = proc.stream.normal();
    proc.z.push_back(zi);
    // Packed row: cross block, then the Schur factor row.
    proc.chol.insert(proc.chol.end(), bi, bi + n_old);
    for (std::size_t j = 0; j <= i; ++j) proc.chol.push_back(ls(i, j));
    for (std::size_t j = 0; j <= i; ++j) value += ls(i, j) * proc.z[n_old + j];
    proc.noise.push_back(value);
  }
}

SufficientStats::SufficientStats(const geometry::SensorField& field,
                                 geometry::SourceLocation src, const model::Pulse& pulse,
                                 const model::ChannelParams& ch, std::uint64_t seed,
                                 double noise_scale)
    : impl_(std::make_unique<Impl>()) {
  if (field.points.empty()) throw InsufficientDataError("SufficientStats: empty sensor field");
  if (!(noise_scale >= 0.0)) {
    throw std::invalid_argument("SufficientStats: noise_scale must be >= 0");
  }
  impl_->field = &field;
  impl_->pulse = pulse;
  impl_->ch = ch;
  impl_->noise_scale = noise_scale;
  impl_->nugget = 1e-10 * 0.5 * pulse.n0 * pulse.es;  // relative to the zero-lag covariance

  const std::size_t m = field.points.size();
  impl_->true_dist.resize(m);
  impl_->true_amp.resize(m);
  impl_->true_delay.resize(m);
  impl_->procs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = std::hypot(src.x - field.points[i].a, src.y - field.points[i].b);
    if (d == 0.0) {
      throw DegenerateGeometryError("SufficientStats: a sensor coincides with the source");
    }
    impl_->true_dist[i] = d;
    impl_->true_amp[i] = std::pow(d, -0.5 * ch.gamma);
    impl_->true_delay[i] = d / ch.c;
    impl_->procs[i].stream = rng::Stream(rng::derive(seed, i));
  }
}

SufficientStats::~SufficientStats() = default;
SufficientStats::SufficientStats(SufficientStats&&) noexcept = default;
SufficientStats& SufficientStats::operator=(SufficientStats&&) noexcept = default;

std::vector<std::size_t> SufficientStats::add_candidates(
    std::span<const geometry::SourceLocation> candidates) {
  Impl& im = *impl_;
  const auto& points = im.field->points;
  const std::size_t m = points.size();

  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  std::vector<std::size_t> fresh;
  for (const auto& cand : candidates) {
    const auto key = key_of(cand);
    if (auto it = im.index_by_location.find(key); it != im.index_by_location.end()) {
      out.push_back(it->second);
      continue;
    }
    const std::size_t idx = im.candidates.size();
    im.candidates.push_back(cand);
    im.index_by_location.emplace(key, idx);
    out.push_back(idx);
    fresh.push_back(idx);
  }
  if (fresh.empty()) return out;

  for (const std::size_t idx : fresh) {
    const auto cand = im.candidates[idx];
    auto& dist = im.dist_cols.emplace_back(m);
    im.y_cols.emplace_back(m);
    for (std::size_t s = 0; s < m; ++s) {
      const double d = std::hypot(cand.x - points[s].a, cand.y - points[s].b);
      if (d == 0.0) {
        throw DegenerateGeometryError(
            "add_candidates: candidate location coincides with a sensor");
      }
      dist[s] = d;
    }
  }

  const bool with_noise = im.noise_scale > 0.0;
  std::vector<double> new_delays;
  std::vector<std::size_t> fresh_slot(fresh.size());
  for (std::size_t s = 0; s < m; ++s) {
    SensorProcess& proc = im.procs[s];
    if (with_noise) {
      new_delays.clear();
      const std::size_t base = proc.delays.size();
      for (std::size_t fi = 0; fi < fresh.size(); ++fi) {
        const double delay = im.dist_cols[fresh[fi]][s] / im.ch.c;
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(delay);
        if (auto it = proc.slot_by_delay.find(bits); it != proc.slot_by_delay.end()) {
          fresh_slot[fi] = it->second;
        } else {
          const std::size_t slot = base + new_delays.size();
          proc.slot_by_delay.emplace(bits, slot);
          fresh_slot[fi] = slot;
          new_delays.push_back(delay);
        }
      }
      if (!new_delays.empty()) im.extend_process(proc, new_delays);
    }
    for (std::size_t fi = 0; fi < fresh.size(); ++fi) {
      const std::size_t idx = fresh[fi];
      const double delay = im.dist_cols[idx][s] / im.ch.c;
      double y = im.true_amp[s] * model::pulse_autocorr(delay - im.true_delay[s], im.pulse);
      if (with_noise) y += im.noise_scale * proc.noise[fresh_slot[fi]];
      im.y_cols[idx][s] = y;
    }
  }
  return out;
}

std::size_t SufficientStats::sensor_count() const { return impl_->field->points.size(); }
std::size_t SufficientStats::candidate_count() const { return impl_->candidates.size(); }

geometry::SourceLocation SufficientStats::candidate(std::size_t index) const {
  return impl_->candidates.at(index);
}

std::optional<std::size_t> SufficientStats::find(geometry::SourceLocation loc) const {
  const auto it = impl_->index_by_location.find(key_of(loc));
  if (it == impl_->index_by_location.end()) return std::nullopt;
  return it->second;
}

double SufficientStats::correlator(std::size_t sensor, std::size_t index) const {
  return impl_->y_cols.at(index).at(sensor);
}

double SufficientStats::distance(std::size_t sensor, std::size_t index) const {
  return impl_->dist_cols.at(index).at(sensor);
}

double SufficientStats::log_likelihood_at(std::size_t index) const {
  const Impl& im = *impl_;
  const auto& dist = im.dist_cols.at(index);
  const auto& y = im.y_cols.at(index);
  const double half_gamma = 0.5 * im.ch.gamma;
  numerics::CompensatedSum sum;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    const double amp = std::pow(dist[s], -half_gamma);
    sum.add(amp * (2.0 * y[s] - amp * im.pulse.es));
  }
  return sum.value() / im.pulse.n0;
}

SufficientStats sufficient_stats(const geometry::SensorField& field,
                                 geometry::SourceLocation src,
                                 std::span<const geometry::SourceLocation> candidates,
                                 const model::Pulse& pulse, const model::ChannelParams& ch,
                                 std::uint64_t seed, double noise_scale) {
  if (candidates.empty()) {
    throw InsufficientDataError("sufficient_stats: candidate list is empty");
  }
  SufficientStats stats(field, src, pulse, ch, seed, noise_scale);
  stats.add_candidates(candidates);
  return stats;
}

double log_likelihood(geometry::SourceLocation theta, const SufficientStats& stats,
                      const geometry::SensorField& field, const model::Pulse& pulse,
                      const model::ChannelParams& ch) {
  (void)pulse;
  (void)ch;
  if (stats.sensor_count() != field.points.size()) {
    throw std::invalid_argument("log_likelihood: stats were built for a different field");
  }
  const auto index = stats.find(theta);
  if (!index) {
    std::ostringstream msg;
    msg << "log_likelihood: (" << theta.x << ", " << theta.y << ") is not a candidate";
    throw std::out_of_range(msg.str());
  }
  return stats.log_likelihood_at(*index);
}

geometry::SourceLocation ml_estimate(const geometry::SensorField& field,
                                     geometry::SourceLocation src, const model::Pulse& pulse,
                                     const model::ChannelParams& ch, const GridSpec& grid,
                                     std::uint64_t seed, bool noiseless) {
  validate(grid);
  SufficientStats stats(field, src, pulse, ch, seed, noiseless ? 0.0 : 1.0);

  std::vector<geometry::SourceLocation> nodes;
  const int half_count = static_cast<int>(std::floor(grid.half_width / grid.coarse_step + 1e-9));
  nodes.reserve(static_cast<std::size_t>(2 * half_count + 1) * (2 * half_count + 1));
  for (int iy = -half_count; iy <= half_count; ++iy) {
    for (int ix = -half_count; ix <= half_count; ++ix) {
      nodes.push_back({src.x + ix * grid.coarse_step, src.y + iy * grid.coarse_step});
    }
  }

  std::size_t best_index = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<std::size_t>& columns) {
    for (const std::size_t col : columns) {
      const double value = stats.log_likelihood_at(col);
      if (value > best_value) {
        best_value = value;
        best_index = col;
      }
    }
  };

  scan(stats.add_candidates(nodes));

  double step = grid.coarse_step;
  for (int round = 0; round < grid.refine_iters; ++round) {
    step *= 0.5;
    const auto center = stats.candidate(best_index);
    nodes.clear();
    for (int iy = -2; iy <= 2; ++iy) {
      for (int ix = -2; ix <= 2; ++ix) {
        nodes.push_back({center.x + ix * step, center.y + iy * step});
      }
    }
    scan(stats.add_candidates(nodes));
  }
  return stats.candidate(best_index);
}

namespace {

struct Aggregate {
  double mean = 0.0;
  double std_err = 0.0;
  double median = 0.0;
};

Aggregate aggregate(std::vector<double> values) {
  Aggregate out;
  if (values.empty()) return out;
  numerics::CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  out.mean = sum.value() / n;
  if (values.size() > 1) {
    numerics::CompensatedSum sq;
    for (double v : values) sq.add((v - out.mean) * (v - out.mean));
    out.std_err = std::sqrt(sq.value() / (n * (n - 1.0)));
  }
  std::sort(values.begin(), values.end());
  const std::size_t half = values.size() / 2;
  out.median = values.size() % 2 == 1 ? values[half]
                                      : 0.5 * (values[half - 1] + values[half]);
  return out;
}

}  // namespace

MseCurve run_mse(const MlSimConfig& cfg, const sweep::Spec& spec) {
  validate(cfg.grid);
  if (cfg.trials < 1) throw std::invalid_argument("run_mse: trials must be >= 1");
  if (cfg.sensors_per_trial < 2) {
    throw std::invalid_argument("run_mse: sensors_per_trial must be >= 2");
  }
  if (spec.values.empty()) throw std::invalid_argument("run_mse: empty sweep");

  MseCurve curve;
  curve.param = spec.param;
  const sweep::PointParams base{cfg.ch, cfg.pulse, cfg.lambda};
  const auto nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t p = 0; p < spec.values.size(); ++p) {
    const auto pp = sweep::apply(base, spec.param, spec.values[p]);
    const double radius = geometry::radius_for_expected_count(cfg.sensors_per_trial, pp.lambda);
    const std::uint64_t point_seed = rng::derive(cfg.master_seed, p);

    std::vector<double> sq_err(cfg.trials, nan);
    std::vector<double> crb_values(cfg.trials, nan);
    parallel::for_each_index(static_cast<std::size_t>(cfg.trials), cfg.workers,
                             [&](std::size_t t) {
      const std::uint64_t trial_seed = rng::derive(point_seed, t);
      const auto field = geometry::sample_ppp(pp.lambda, radius, {0.0, 0.0},
                                              rng::derive(trial_seed, 1));
      try {
        const auto polars = geometry::polar_of(field, {0.0, 0.0});
        if (polars.size() < 2) return;
        crb_values[t] = crb::crb_realization(polars, pp.ch);
        const auto est = ml_estimate(field, {0.0, 0.0}, pp.pulse, pp.ch, cfg.grid,
                                     rng::derive(trial_seed, 2), cfg.noiseless);
        sq_err[t] = est.x * est.x + est.y * est.y;
      } catch (const SingularGeometryError&) {
      } catch (const DegenerateGeometryError&) {
      }
    });

    MsePoint point;
    point.sweep_value = spec.values[p];
    std::vector<double> kept_sq, kept_crb;
    for (int t = 0; t < cfg.trials; ++t) {
      if (!std::isnan(sq_err[t]) && !std::isnan(crb_values[t])) {
        kept_sq.push_back(sq_err[t]);
        kept_crb.push_back(crb_values[t]);
      }
    }
    point.excluded = cfg.trials - static_cast<int>(kept_sq.size());
    if (kept_sq.empty()) {
      throw InsufficientDataError("run_mse: every trial at a sweep point was excluded");
    }
    const auto mse_agg = aggregate(kept_sq);
    point.mse = mse_agg.mean;
    point.mse_stderr = mse_agg.std_err;
    const auto crb_agg = aggregate(kept_crb);
    point.avg_crb_mean = crb_agg.mean;
    point.avg_crb_stderr = crb_agg.std_err;
    point.avg_crb_median = crb_agg.median;
    try {
      point.crb_lb = bounds::crb_lb(pp.lambda, pp.ch).value;
    } catch (const ConvergenceError&) {
      point.crb_lb = nan;
    }
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace locbound::mlsim
