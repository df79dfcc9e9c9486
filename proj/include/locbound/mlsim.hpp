#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "locbound/geometry.hpp"
#include "locbound/model.hpp"
#include "locbound/sweep.hpp"

namespace locbound::mlsim {

/// Search-grid geometry for the maximum-likelihood estimate: a square coarse
/// grid of the given half-width and step centered on the true source, then
/// `refine_iters` rounds of 5x5 re-centered grids with the step halved each
/// round (final resolution coarse_step / 2^refine_iters).
struct GridSpec {
  double half_width = 30.0;
  double coarse_step = 2.0;
  int refine_iters = 6;
};

void validate(const GridSpec& grid);

/// Correlator outputs y_m(theta') for every sensor m and candidate source
/// location theta', synthesized directly in the delay domain:
///
///   y_m(theta') = D_m^(-gamma/2) * C(tau'_m - tau_m) + noise,
///
/// where C is the closed-form pulse autocorrelation and the noise across
/// candidates is a Gaussian vector with covariance (N0/2) * C(tau'_i - tau'_j)
/// per sensor, independent across sensors. There is no waveform sampling
/// anywhere, so the statistics are exact in distribution.
///
/// Candidates can be appended after construction; new noise values are drawn
/// conditionally on everything already generated (incremental Cholesky of the
/// delay covariance), so a growing candidate set stays one consistent
/// realization of the underlying continuous-time noise.
class SufficientStats {
public:
  SufficientStats(const geometry::SensorField& field, geometry::SourceLocation src,
                  const model::Pulse& pulse, const model::ChannelParams& ch,
                  std::uint64_t seed, double noise_scale = 1.0);
  ~SufficientStats();
  SufficientStats(SufficientStats&&) noexcept;
  SufficientStats& operator=(SufficientStats&&) noexcept;

  /// Appends candidates, returning the column index of each input in order.
  /// A location identical to an existing candidate maps to its column.
  /// Candidates coinciding exactly with a sensor throw
  /// DegenerateGeometryError; duplicate delays within one sensor are shared
  /// (perfectly correlated noise) rather than refactored.
  std::vector<std::size_t> add_candidates(std::span<const geometry::SourceLocation> candidates);

  std::size_t sensor_count() const;
  std::size_t candidate_count() const;
  geometry::SourceLocation candidate(std::size_t index) const;
  /// Exact-match lookup of a candidate location.
  std::optional<std::size_t> find(geometry::SourceLocation loc) const;

  /// y_m(theta'_index), energy-normalized.
  double correlator(std::size_t sensor, std::size_t index) const;
  /// Distance from sensor to candidate (cached).
  double distance(std::size_t sensor, std::size_t index) const;

  /// Log-likelihood of candidate `index`:
  ///   (1/N0) * sum_m [ 2 D'_m^(-gamma/2) y_m - D'_m^(-gamma) Es ].
  double log_likelihood_at(std::size_t index) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot form: synthesize stats for a fixed candidate list.
SufficientStats sufficient_stats(const geometry::SensorField& field,
                                 geometry::SourceLocation src,
                                 std::span<const geometry::SourceLocation> candidates,
                                 const model::Pulse& pulse, const model::ChannelParams& ch,
                                 std::uint64_t seed, double noise_scale = 1.0);

/// Log-likelihood of `theta`, which must be one of the candidates in `stats`
/// (throws std::out_of_range otherwise).
double log_likelihood(geometry::SourceLocation theta, const SufficientStats& stats,
                      const geometry::SensorField& field, const model::Pulse& pulse,
                      const model::ChannelParams& ch);

/// Maximum-likelihood location estimate: coarse grid argmax followed by
/// grid-shrinking refinement. Ties keep the earliest candidate in row-major
/// insertion order. Deterministic in `seed`.
geometry::SourceLocation ml_estimate(const geometry::SensorField& field,
                                     geometry::SourceLocation src, const model::Pulse& pulse,
                                     const model::ChannelParams& ch, const GridSpec& grid,
                                     std::uint64_t seed, bool noiseless = false);

struct MlSimConfig {
  model::ChannelParams ch;
  model::Pulse pulse;
  double lambda = 0.01;
  int sensors_per_trial = 1000;
  int trials = 100;
  GridSpec grid;
  std::uint64_t master_seed = 1;
  bool noiseless = false;
  int workers = 1;
};

struct MsePoint {
  double sweep_value = 0.0;
  double mse = 0.0;
  double mse_stderr = 0.0;
  double avg_crb_mean = 0.0;
  double avg_crb_stderr = 0.0;
  double avg_crb_median = 0.0;
  double crb_lb = 0.0;  // NaN if the quadrature failed for this point
  int excluded = 0;
};

struct MseCurve {
  sweep::Param param = sweep::Param::kSnrDb;
  std::vector<MsePoint> points;
};

/// Monte-Carlo MSE of the ML estimator across a parameter sweep, with the
/// per-trial CRB statistics and the density-averaged lower bound attached for
/// the same parameters. Trial t of point p derives its seeds from
/// (master_seed, p, t); reduction is in trial order, so results do not depend
/// on the worker count.
MseCurve run_mse(const MlSimConfig& cfg, const sweep::Spec& spec);

}  // namespace locbound::mlsim
