#pragma once

#include "locbound/model.hpp"
#include "locbound/numerics.hpp"

namespace locbound::bounds {

/// Which part of the information kernel enters the bound. The time-of-arrival
/// variant deletes the gamma^2 term outright (it is not reachable by setting
/// a parameter to zero), which makes the closed-form cross-checks first-class
/// rather than limiting cases.
enum class KernelMode {
  kFull,      // g(r) = r^(-gamma-2) * (gamma^2 + 4 we r^2 / c^2)
  kRssOnly,   // g(r) = gamma^2 * r^(-gamma-2)
  kToaOnly,   // g(r) = (4 we / c^2) * r^(-gamma)
};

/// Z(s) = integral_0^inf [1 - exp(-s g(r))] r dr: the exponent of the Laplace
/// functional of the aggregate path gain over the Poisson field. Nonnegative
/// and nondecreasing in s; exactly 0 at s = 0.
double z_of_s(double s, const model::ChannelParams& ch, const numerics::QuadratureSpec& spec,
              KernelMode mode = KernelMode::kFull);

struct CrbLb {
  double value = 0.0;             // m^2
  double quadrature_error = 0.0;  // estimated absolute error of the outer integral
};

/// Density-averaged lower bound on the localization MSE,
///   (4/rho) * integral_0^inf exp(-2 pi lambda Z(s)) ds,
/// by nested adaptive quadrature. The inner tolerance is 10x tighter than the
/// outer one. The outer variable is rescaled by the integrand's own decay
/// scale (found by geometric scan; the integrand is monotone decreasing)
/// before the (0,inf) -> (0,1) transform, so the mass is always resolvable.
CrbLb crb_lb(double lambda, const model::ChannelParams& ch,
             const numerics::QuadratureSpec& spec = {}, KernelMode mode = KernelMode::kFull);

/// Closed-form wideband asymptote
///   c^2 (pi lambda)^(-gamma/2) Gamma^(-gamma/2)(1-2/gamma) Gamma(1+gamma/2) / (rho we).
/// Throws std::domain_error when we == 0 (the expression diverges).
double wideband_bound(double lambda, const model::ChannelParams& ch);

/// Closed-form narrowband asymptote
///   4/(rho gamma^2) * (pi lambda Gamma(gamma/(gamma+2)))^(-gamma/2-1) * Gamma(2+gamma/2).
/// Independent of we.
double narrowband_bound(double lambda, const model::ChannelParams& ch);

/// Certificate that the numeric bound sits where the closed forms say it
/// must. The narrowband-gap comparison is informational: its constant comes
/// from a chain of proof-side estimates and is loose by design.
struct SandwichReport {
  double crb_lb = 0.0;
  double crb_lb_w = 0.0;
  double crb_lb_n = 0.0;
  double sandwich_lo = 0.0;     // (1 - pi lambda c^2 gamma / (2 we)) * crb_lb_w, clamped at 0
  bool vacuous = false;         // clamp engaged; the lower member carries no information
  bool lower_ok = false;        // sandwich_lo < crb_lb (or vacuous)
  bool upper_ok = false;        // crb_lb < crb_lb_w
  double lower_margin = 0.0;    // crb_lb - sandwich_lo
  double upper_margin = 0.0;    // crb_lb_w - crb_lb
  double narrowband_gap = 0.0;  // |crb_lb_n - crb_lb|
  double narrowband_limit = 0.0;
  bool narrowband_ok = false;   // informational
  double quadrature_error = 0.0;
};

SandwichReport sandwich_check(double lambda, const model::ChannelParams& ch,
                              const numerics::QuadratureSpec& spec = {});

/// Everything the CSV emitters need for one parameter point.
struct BoundResult {
  double crb_lb = 0.0;
  double crb_lb_w = 0.0;  // +inf when we == 0
  double crb_lb_n = 0.0;
  double sandwich_lo = 0.0;
  double narrowband_gap = 0.0;
  double quadrature_error = 0.0;
  bool sandwich_vacuous = false;
};

BoundResult evaluate_bounds(double lambda, const model::ChannelParams& ch,
                            const numerics::QuadratureSpec& spec = {});

}  // namespace locbound::bounds
