#include "locbound/crb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "locbound/errors.hpp"
#include "locbound/numerics.hpp"
#include "locbound/parallel.hpp"
#include "locbound/rng.hpp"

namespace locbound::crb {

FisherInfo fim(std::span<const geometry::Polar> polars, const model::ChannelParams& ch) {
  if (polars.empty()) throw InsufficientDataError("fim: no sensors");
  numerics::CompensatedSum xx, xy, yy;
  for (const auto& p : polars) {
    const double g = model::g_kernel(p.d, ch);
    const double cp = std::cos(p.phi);
    const double sp = std::sin(p.phi);
    xx.add(g * cp * cp);
    xy.add(g * sp * cp);
    yy.add(g * sp * sp);
  }
  return FisherInfo{ch.rho * xx.value(), ch.rho * xy.value(), ch.rho * yy.value()};
}

namespace {

constexpr double kSingularDetFraction = 1e-14;  // det <= 1e-14 * trace^2 is singular

void require_nonsingular(double det, double trace, const char* where) {
  if (!(det > kSingularDetFraction * trace * trace)) {
    std::ostringstream msg;
    msg << where << ": Fisher information is singular (det " << det << ", trace " << trace
        << "); sensors collinear with the source or fewer than two sensors";
    throw SingularGeometryError(msg.str());
  }
}

}  // namespace

double crb_realization(std::span<const geometry::Polar> polars,
                       const model::ChannelParams& ch) {
  if (polars.empty()) throw InsufficientDataError("crb_realization: no sensors");

  const std::size_t n = polars.size();
  std::vector<double> g(n), phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = model::g_kernel(polars[i].d, ch);
    phi[i] = polars[i].phi;
  }
  // Largest kernel weights first; with compensated accumulation the order
  // barely matters, but it keeps the partial sums from growing past the
  // final magnitude.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&g](std::size_t a, std::size_t b) { return g[a] > g[b]; });

  numerics::CompensatedSum weight_sum;
  numerics::CompensatedSum pair_sum;
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t im = order[m];
    weight_sum.add(g[im]);
    for (std::size_t j = m + 1; j < n; ++j) {
      const std::size_t ij = order[j];
      const double s = std::sin(phi[im] - phi[ij]);
      pair_sum.add(g[im] * g[ij] * s * s);
    }
  }

  const double num = weight_sum.value();
  const double den = pair_sum.value();
  // Same scale-free criterion as crb_from_fim: det = rho^2 * den,
  // trace = rho * num, so the rho factors cancel.
  require_nonsingular(den, num, "crb_realization");
  return num / (ch.rho * den);
}

double crb_from_fim(const FisherInfo& info) {
  require_nonsingular(info.det(), info.trace(), "crb_from_fim");
  return info.trace() / info.det();
}

AvgCrbEstimate avg_crb(double lambda, const model::ChannelParams& ch, int trials,
                       int sensors_per_trial, std::uint64_t master_seed, int workers) {
  if (trials < 1) throw std::invalid_argument("avg_crb: trials must be >= 1");
  if (sensors_per_trial < 2) {
    throw std::invalid_argument("avg_crb: sensors_per_trial must be >= 2");
  }
  const double radius = geometry::radius_for_expected_count(sensors_per_trial, lambda);

  // One slot per trial; NaN marks an excluded (singular) trial. Filled in any
  // order, reduced in trial order.
  std::vector<double> values(static_cast<std::size_t>(trials),
                             std::numeric_limits<double>::quiet_NaN());
  parallel::for_each_index(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const std::uint64_t seed = rng::derive(master_seed, t);
    const auto field = geometry::sample_ppp(lambda, radius, {0.0, 0.0}, seed);
    try {
      const auto polars = geometry::polar_of(field, {0.0, 0.0});
      if (polars.size() < 2) return;  // stays NaN -> excluded
      values[t] = crb_realization(polars, ch);
    } catch (const SingularGeometryError&) {
    } catch (const DegenerateGeometryError&) {
    }
  });

  std::vector<double> kept;
  kept.reserve(values.size());
  for (double v : values) {
    if (!std::isnan(v)) kept.push_back(v);
  }

  AvgCrbEstimate est;
  est.trials = trials;
  est.sensors_per_trial = sensors_per_trial;
  est.excluded = trials - static_cast<int>(kept.size());
  est.exclusion_warning = est.excluded > 0.01 * trials;
  if (kept.empty()) {
    throw InsufficientDataError("avg_crb: every trial was excluded as singular");
  }

  numerics::CompensatedSum sum;
  double max_value = 0.0;
  for (double v : kept) {
    sum.add(v);
    max_value = std::max(max_value, v);
  }
  const double n = static_cast<double>(kept.size());
  est.mean = sum.value() / n;
  est.heavy_tail_flag = max_value > 0.1 * sum.value();

  numerics::CompensatedSum sq;
  for (double v : kept) sq.add((v - est.mean) * (v - est.mean));
  est.std_err = kept.size() > 1 ? std::sqrt(sq.value() / (n * (n - 1.0))) : 0.0;

  std::vector<double> sorted = kept;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t half = sorted.size() / 2;
  est.median = sorted.size() % 2 == 1 ? sorted[half]
                                      : 0.5 * (sorted[half - 1] + sorted[half]);
  return est;
}

}  // namespace locbound::crb
