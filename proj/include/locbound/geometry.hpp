#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "locbound/model.hpp"

namespace locbound::geometry {

struct SourceLocation {
  double x = 0.0;
  double y = 0.0;
};

/// One realization of a homogeneous Poisson field, truncated to a disc of
/// `radius` meters around the source used for sampling. Immutable after
/// creation; safe to share across threads.
struct SensorField {
  struct Point {
    double a = 0.0;
    double b = 0.0;
  };
  std::vector<Point> points;
  double lambda = 0.0;  // sensors per m^2
  double radius = 0.0;  // truncation radius, m
  std::uint64_t seed = 0;
};

/// Source-relative coordinates of one sensor. The bearing follows the
/// source-minus-sensor convention: cos(phi) = (x - a)/d, sin(phi) = (y - b)/d,
/// with phi in (-pi, pi].
struct Polar {
  double d = 0.0;
  double phi = 0.0;
};

/// Truncation radius giving an expected sensor count of `expected_count`:
/// R = sqrt(N / (pi * lambda)).
double radius_for_expected_count(double expected_count, double lambda);

/// Samples a Poisson(lambda * pi * radius^2) number of sensors i.i.d. uniform
/// on the disc around `center`. Deterministic in `seed`. An expected count
/// above 1e8 throws ResourceLimitError.
SensorField sample_ppp(double lambda, double radius, SourceLocation center, std::uint64_t seed);

/// Distance and bearing of every sensor relative to `src`, in field order.
/// A sensor exactly at the source throws DegenerateGeometryError.
std::vector<Polar> polar_of(const SensorField& field, SourceLocation src);

/// Expected aggregate path gain lost to truncation,
/// E[sum_{D > R} D^-gamma] = 2 pi lambda R^(2-gamma) / (gamma - 2).
/// Reported alongside results so the finite-disc approximation is auditable.
double truncation_tail(const SensorField& field, const model::ChannelParams& ch);

/// Text round-trip: header line "lambda radius seed", then one "a b" pair per
/// line, 17 significant digits.
std::string to_text(const SensorField& field);
SensorField field_from_text(std::string_view text);

}  // namespace locbound::geometry
