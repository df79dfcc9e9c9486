#include "locbound/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "locbound/errors.hpp"
#include "locbound/rng.hpp"

namespace locbound::geometry {

namespace {
constexpr double kPi = std::numbers::pi;
}

double radius_for_expected_count(double expected_count, double lambda) {
  if (!(expected_count > 0.0)) {
    throw std::invalid_argument("radius_for_expected_count: expected_count must be > 0");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("radius_for_expected_count: lambda must be > 0");
  }
  return std::sqrt(expected_count / (kPi * lambda));
}

SensorField sample_ppp(double lambda, double radius, SourceLocation center, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sample_ppp: lambda must be > 0");
  if (!(radius > 0.0)) throw std::invalid_argument("sample_ppp: radius must be > 0");

  const double mean_count = lambda * kPi * radius * radius;
  if (mean_count > 1e8) {
    std::ostringstream msg;
    msg << "sample_ppp: expected count " << mean_count << " exceeds the 1e8 guard";
    throw ResourceLimitError(msg.str());
  }

  rng::Stream stream(seed);
  const std::uint64_t count = stream.poisson(mean_count);

  SensorField field;
  field.lambda = lambda;
  field.radius = radius;
  field.seed = seed;
  field.points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double r = radius * std::sqrt(stream.uniform01());
    const double angle = 2.0 * kPi * stream.uniform01();
    field.points.push_back({center.x + r * std::cos(angle), center.y + r * std::sin(angle)});
  }
  return field;
}

std::vector<Polar> polar_of(const SensorField& field, SourceLocation src) {
  std::vector<Polar> out;
  out.reserve(field.points.size());
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const double dx = src.x - field.points[i].a;
    const double dy = src.y - field.points[i].b;
    const double d = std::hypot(dx, dy);
    if (d == 0.0) {
      std::ostringstream msg;
      msg << "polar_of: sensor " << i << " coincides with the source";
      throw DegenerateGeometryError(msg.str());
    }
    double phi = std::atan2(dy, dx);
    if (phi <= -kPi) phi = kPi;  // atan2(-0, negative) lands on -pi
    out.push_back({d, phi});
  }
  return out;
}

double truncation_tail(const SensorField& field, const model::ChannelParams& ch) {
  return 2.0 * kPi * field.lambda * std::pow(field.radius, 2.0 - ch.gamma) / (ch.gamma - 2.0);
}

std::string to_text(const SensorField& field) {
  std::string out;
  char line[96];
  std::snprintf(line, sizeof line, "%.17g %.17g %llu\n", field.lambda, field.radius,
                static_cast<unsigned long long>(field.seed));
  out += line;
  for (const auto& p : field.points) {
    std::snprintf(line, sizeof line, "%.17g %.17g\n", p.a, p.b);
    out += line;
  }
  return out;
}

SensorField field_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  SensorField field;
  std::string header;
  if (!std::getline(in, header)) {
    throw std::invalid_argument("field_from_text: missing header line");
  }
  {
    std::istringstream hs(header);
    unsigned long long seed = 0;
    if (!(hs >> field.lambda >> field.radius >> seed)) {
      throw std::invalid_argument("field_from_text: malformed header, expected 'lambda radius seed'");
    }
    field.seed = seed;
  }
  if (!(field.lambda > 0.0) || !(field.radius > 0.0)) {
    throw std::invalid_argument("field_from_text: lambda and radius must be positive");
  }
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    SensorField::Point p;
    if (!(ls >> p.a >> p.b)) {
      std::ostringstream msg;
      msg << "field_from_text: malformed point on line " << line_no;
      throw std::invalid_argument(msg.str());
    }
    field.points.push_back(p);
  }
  return field;
}

}  // namespace locbound::geometry
