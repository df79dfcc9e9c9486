#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "locbound/geometry.hpp"
#include "locbound/model.hpp"

namespace locbound::crb {

/// 2x2 symmetric Fisher information over the source coordinates, in m^-2.
struct FisherInfo {
  double ixx = 0.0;
  double ixy = 0.0;
  double iyy = 0.0;

  double trace() const { return ixx + iyy; }
  /// Determinant with Kahan's fma compensation: exact to ~2 ulp of the
  /// result even when the products nearly cancel (ill-conditioned
  /// geometries), where the naive expression loses most of its digits.
  double det() const {
    const double w = ixy * ixy;
    const double e = std::fma(-ixy, ixy, w);
    const double f = std::fma(ixx, iyy, -w);
    return f + e;
  }
};

/// Sum of per-sensor rank-1 information terms,
///   rho * g(d_m) * [cos^2 phi_m, sin cos; sin cos, sin^2 phi_m].
/// Throws InsufficientDataError on an empty list.
FisherInfo fim(std::span<const geometry::Polar> polars, const model::ChannelParams& ch);

/// Mean-square-error bound for one sensor realization, evaluated in the
/// pairwise form
///   (1/rho) * sum_m g_m / sum_{m<j} g_m g_j sin^2(phi_m - phi_j),
/// which is algebraically trace(FIM^-1) but accumulates only nonnegative
/// terms. Compensated summation keeps the 10^6-term denominator accurate.
/// Throws SingularGeometryError when det(FIM) <= 1e-14 * trace(FIM)^2
/// (single sensor, or all sensors collinear with the source).
double crb_realization(std::span<const geometry::Polar> polars, const model::ChannelParams& ch);

/// trace(FIM^-1) computed directly from the matrix; the cross-check route for
/// crb_realization. Same singularity rule.
double crb_from_fim(const FisherInfo& info);

struct AvgCrbEstimate {
  double mean = 0.0;     // m^2
  double std_err = 0.0;  // m^2
  double median = 0.0;   // m^2
  int trials = 0;
  int sensors_per_trial = 0;
  int excluded = 0;           // singular/degenerate trials, reported not retried
  bool exclusion_warning = false;  // more than 1% of trials excluded
  bool heavy_tail_flag = false;    // one trial contributes >10% of the mean
};

/// Monte-Carlo mean of crb_realization over independent field draws. Trial t
/// uses seed derive(master_seed, t); accumulation is in trial order, so the
/// result is identical for any worker count.
AvgCrbEstimate avg_crb(double lambda, const model::ChannelParams& ch, int trials,
                       int sensors_per_trial, std::uint64_t master_seed, int workers = 1);

}  // namespace locbound::crb
