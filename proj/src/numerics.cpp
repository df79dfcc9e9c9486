#include "locbound/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "locbound/errors.hpp"

namespace locbound::numerics {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15
// abscissae/weights on [-1, 1]; positive half, kXgk[7] = 0). The odd-index
// abscissae are the embedded Gauss nodes. All nodes are interior, so the
// integrand is never evaluated at a subinterval endpoint.
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct Panel {
  double a = 0.0, b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

bool operator<(const Panel& lhs, const Panel& rhs) { return lhs.error < rhs.error; }

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = f(center);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = kWgk[7] * std::fabs(fc);
  double flo[7], fhi[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    flo[i] = f(center - dx);
    fhi[i] = f(center + dx);
    resk += kWgk[i] * (flo[i] + fhi[i]);
    resabs += kWgk[i] * (std::fabs(flo[i]) + std::fabs(fhi[i]));
    if (i % 2 == 1) resg += kWg[(i - 1) / 2] * (flo[i] + fhi[i]);
  }

  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - mean);
  for (int i = 0; i < 7; ++i) {
    resasc += kWgk[i] * (std::fabs(flo[i] - mean) + std::fabs(fhi[i] - mean));
  }
  resabs *= std::fabs(half);
  resasc *= std::fabs(half);

  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * resabs);

  return Panel{a, b, resk * half, err};
}

}  // namespace

void validate(const QuadratureSpec& spec) {
  if (!(spec.rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
  if (!(spec.abs_tol >= 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
  if (spec.max_subdivisions < 1) {
    throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
  }
}

double log_gamma(double x) {
  if (!(x > 0.0)) {
    std::ostringstream msg;
    msg << "log_gamma: argument must be positive, got " << x;
    throw std::domain_error(msg.str());
  }
  return std::lgamma(x);
}

QuadratureResult integrate_unit_interval(const std::function<double(double)>& f,
                                         const QuadratureSpec& spec) {
  validate(spec);

  std::priority_queue<Panel> active;
  active.push(evaluate_panel(f, 0.0, 1.0));
  double total_value = active.top().value;
  double total_error = active.top().error;
  // Panels too narrow to bisect park their error here and stop competing.
  double settled_value = 0.0;
  double settled_error = 0.0;
  int splits = 0;

  auto tolerance_met = [&] {
    const double value = total_value + settled_value;
    const double error = total_error + settled_error;
    return error <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(value));
  };

  while (!tolerance_met()) {
    if (active.empty() || splits >= spec.max_subdivisions) {
      const double value = total_value + settled_value;
      const double error = total_error + settled_error;
      std::ostringstream msg;
      msg << "quadrature did not converge after " << splits << " subdivisions (estimate "
          << value << ", error bound " << error << ")";
      throw ConvergenceError(msg.str(), value, error);
    }
    const Panel worst = active.top();
    active.pop();
    total_value -= worst.value;
    total_error -= worst.error;

    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Width at the resolution of doubles; nothing left to refine.
      settled_value += worst.value;
      settled_error += worst.error;
      continue;
    }
    ++splits;
    const Panel left = evaluate_panel(f, worst.a, mid);
    const Panel right = evaluate_panel(f, mid, worst.b);
    total_value += left.value + right.value;
    total_error += left.error + right.error;
    active.push(left);
    active.push(right);
  }

  return QuadratureResult{total_value + settled_value, total_error + settled_error, splits};
}

QuadratureResult integrate_semi_infinite(const std::function<double(double)>& f,
                                         const QuadratureSpec& spec, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("integrate_semi_infinite: scale must be positive and finite");
  }
  auto transformed = [&f, scale](double u) -> double {
    const double omu = 1.0 - u;
    if (omu <= 0.0) return 0.0;
    const double x = scale * (u / omu);
    if (!std::isfinite(x)) return 0.0;
    const double y = f(x);
    if (y == 0.0) return 0.0;
    return scale * y / (omu * omu);
  };
  return integrate_unit_interval(transformed, spec);
}

SquareMatrix cholesky(const SquareMatrix& a) {
  const std::size_t n = a.size();
  if (n == 0) throw std::invalid_argument("cholesky: empty matrix");

  double max_abs = 0.0;
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_diag = std::max(max_diag, a(i, i));
    for (std::size_t j = 0; j < n; ++j) max_abs = std::max(max_abs, std::fabs(a(i, j)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::fabs(a(i, j) - a(j, i)) > 1e-12 * std::max(max_abs, 1.0)) {
        throw std::invalid_argument("cholesky: matrix is not symmetric");
      }
    }
  }

  const double pivot_floor = 1e-12 * max_diag;
  SquareMatrix lower(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > pivot_floor)) {
      std::ostringstream msg;
      msg << "cholesky: pivot " << d << " at column " << j << " is at or below the floor "
          << pivot_floor;
      throw NotPsdError(msg.str());
    }
    lower(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / lower(j, j);
    }
  }
  return lower;
}

}  // namespace locbound::numerics
