#include "locbound/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "locbound/errors.hpp"

namespace locbound::bounds {

namespace {

constexpr double kPi = std::numbers::pi;

double kernel(double r, const model::ChannelParams& ch, KernelMode mode) {
  switch (mode) {
    case KernelMode::kFull:
      return model::g_kernel(r, ch);
    case KernelMode::kRssOnly:
      return ch.gamma * ch.gamma * std::pow(r, -ch.gamma - 2.0);
    case KernelMode::kToaOnly:
      return 4.0 * ch.we / (ch.c * ch.c) * std::pow(r, -ch.gamma);
  }
  return 0.0;
}

numerics::QuadratureSpec inner_spec(const numerics::QuadratureSpec& outer) {
  numerics::QuadratureSpec inner = outer;
  inner.rel_tol = outer.rel_tol / 10.0;
  inner.abs_tol = 0.0;
  return inner;
}

}  // namespace

double z_of_s(double s, const model::ChannelParams& ch, const numerics::QuadratureSpec& spec,
              KernelMode mode) {
  if (!(s >= 0.0)) throw std::domain_error("z_of_s: s must be >= 0");
  if (s == 0.0) return 0.0;
  if (mode == KernelMode::kToaOnly && ch.we == 0.0) return 0.0;

  auto integrand = [&](double r) -> double {
    // -expm1 keeps precision where s*g(r) is tiny (the whole far tail).
    return -std::expm1(-s * kernel(r, ch, mode)) * r;
  };
  return numerics::integrate_semi_infinite(integrand, spec).value;
}

CrbLb crb_lb(double lambda, const model::ChannelParams& ch,
             const numerics::QuadratureSpec& spec, KernelMode mode) {
  if (!(lambda > 0.0)) throw std::invalid_argument("crb_lb: lambda must be > 0");
  numerics::validate(spec);
  if (mode == KernelMode::kToaOnly && ch.we == 0.0) {
    throw std::domain_error("crb_lb: time-of-arrival kernel is empty when we == 0");
  }

  const auto z_spec = inner_spec(spec);
  auto survivor = [&](double s) -> double {
    return std::exp(-2.0 * kPi * lambda * z_of_s(s, ch, z_spec, mode));
  };

  // survivor(0) = 1 and the function decreases monotonically; walk powers of
  // 4 until it has visibly decayed, back off if the start was already deep in
  // the tail. The result scales the outer variable so the transition region
  // maps near the middle of (0,1).
  double scale = 1.0;
  for (int i = 0; i < 200 && survivor(scale) > 0.3; ++i) scale *= 4.0;
  for (int i = 0; i < 400 && survivor(scale) < 0.01; ++i) scale *= 0.25;

  const auto outer = numerics::integrate_semi_infinite(survivor, spec, scale);
  const double prefactor = 4.0 / ch.rho;
  return CrbLb{prefactor * outer.value, prefactor * outer.error_bound};
}

double wideband_bound(double lambda, const model::ChannelParams& ch) {
  if (!(lambda > 0.0)) throw std::invalid_argument("wideband_bound: lambda must be > 0");
  if (ch.we == 0.0) {
    throw std::domain_error("wideband_bound: diverges at zero effective bandwidth");
  }
  const double g = ch.gamma;
  const double log_value = 2.0 * std::log(ch.c) - 0.5 * g * std::log(kPi * lambda) -
                           0.5 * g * numerics::log_gamma(1.0 - 2.0 / g) +
                           numerics::log_gamma(1.0 + 0.5 * g) - std::log(ch.rho) -
                           std::log(ch.we);
  return std::exp(log_value);
}

double narrowband_bound(double lambda, const model::ChannelParams& ch) {
  if (!(lambda > 0.0)) throw std::invalid_argument("narrowband_bound: lambda must be > 0");
  const double g = ch.gamma;
  const double log_value =
      std::log(4.0) - std::log(ch.rho) - 2.0 * std::log(g) +
      (-0.5 * g - 1.0) * (std::log(kPi * lambda) + numerics::log_gamma(g / (g + 2.0))) +
      numerics::log_gamma(2.0 + 0.5 * g);
  return std::exp(log_value);
}

SandwichReport sandwich_check(double lambda, const model::ChannelParams& ch,
                              const numerics::QuadratureSpec& spec) {
  SandwichReport report;
  const auto lb = crb_lb(lambda, ch, spec, KernelMode::kFull);
  report.crb_lb = lb.value;
  report.quadrature_error = lb.quadrature_error;
  report.crb_lb_w = wideband_bound(lambda, ch);
  report.crb_lb_n = narrowband_bound(lambda, ch);

  const double shrink = 1.0 - kPi * lambda * ch.c * ch.c * ch.gamma / (2.0 * ch.we);
  if (shrink <= 0.0) {
    report.sandwich_lo = 0.0;
    report.vacuous = true;
  } else {
    report.sandwich_lo = shrink * report.crb_lb_w;
  }
  report.lower_ok = report.vacuous || report.sandwich_lo < report.crb_lb;
  report.upper_ok = report.crb_lb < report.crb_lb_w;
  report.lower_margin = report.crb_lb - report.sandwich_lo;
  report.upper_margin = report.crb_lb_w - report.crb_lb;

  // Explicit first-order constant bounding |narrowband - exact|:
  //   16 pi lambda we / (rho c^2 gamma^4)
  //     * Gamma((gamma-2)/(gamma+2)) * Gamma((gamma+6)/2)
  //     * (pi lambda Gamma(gamma/(gamma+2)))^(-(gamma+6)/2).
  // Derived by integrating the kernel-splitting estimate against the radial
  // measure r dr; the resulting constant is asymptotically tight (the
  // measured gap approaches it from below as we -> 0). Informational: the
  // comparison is resolution-limited once the true gap drops under the
  // quadrature error of crb_lb.
  const double g = ch.gamma;
  report.narrowband_gap = std::fabs(report.crb_lb_n - report.crb_lb);
  if (ch.we > 0.0) {
    const double log_limit = std::log(16.0 * kPi) + std::log(lambda) + std::log(ch.we) -
                             std::log(ch.rho) - 2.0 * std::log(ch.c) - 4.0 * std::log(g) +
                             numerics::log_gamma((g - 2.0) / (g + 2.0)) +
                             numerics::log_gamma(0.5 * (g + 6.0)) -
                             0.5 * (g + 6.0) * (std::log(kPi * lambda) +
                                                numerics::log_gamma(g / (g + 2.0)));
    report.narrowband_limit = std::exp(log_limit);
  } else {
    report.narrowband_limit = 0.0;
  }
  report.narrowband_ok =
      report.narrowband_gap < report.narrowband_limit + report.quadrature_error;
  return report;
}

BoundResult evaluate_bounds(double lambda, const model::ChannelParams& ch,
                            const numerics::QuadratureSpec& spec) {
  BoundResult out;
  const auto lb = crb_lb(lambda, ch, spec, KernelMode::kFull);
  out.crb_lb = lb.value;
  out.quadrature_error = lb.quadrature_error;
  out.crb_lb_n = narrowband_bound(lambda, ch);
  if (ch.we > 0.0) {
    out.crb_lb_w = wideband_bound(lambda, ch);
    const double shrink = 1.0 - kPi * lambda * ch.c * ch.c * ch.gamma / (2.0 * ch.we);
    if (shrink <= 0.0) {
      out.sandwich_lo = 0.0;
      out.sandwich_vacuous = true;
    } else {
      out.sandwich_lo = shrink * out.crb_lb_w;
    }
  } else {
    out.crb_lb_w = std::numeric_limits<double>::infinity();
    out.sandwich_lo = 0.0;
    out.sandwich_vacuous = true;
  }
  out.narrowband_gap = std::fabs(out.crb_lb_n - out.crb_lb);
  return out;
}

}  // namespace locbound::bounds
