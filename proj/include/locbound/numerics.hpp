#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace locbound::numerics {

/// Tolerances and budget for the adaptive quadrature routines.
struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;
};

/// Throws std::invalid_argument if the spec violates its invariants
/// (rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1).
void validate(const QuadratureSpec& spec);

struct QuadratureResult {
  double value = 0.0;
  double error_bound = 0.0;  // estimated absolute error
  int subdivisions = 0;
};

/// ln Gamma(x) for x > 0. Relative error a few ulp over the in-scope range.
/// Throws std::domain_error for x <= 0 or non-finite x.
double log_gamma(double x);

/// Adaptive Gauss-Kronrod (7/15 pair) integration over the open interval
/// (0, 1). The rule never evaluates the endpoints, so integrable endpoint
/// singularities are handled by subdivision alone.
QuadratureResult integrate_unit_interval(const std::function<double(double)>& f,
                                         const QuadratureSpec& spec = {});

/// Integral of f over (0, infinity) via the substitution x = scale * u/(1-u),
/// then adaptive subdivision on (0, 1). `scale` defaults to 1; pass the
/// characteristic decay scale of f when its mass sits far from O(1), so the
/// transformed mass lands where doubles have resolution. Values of f at
/// unrepresentably large x are taken as 0 (f must decay at infinity).
///
/// Throws ConvergenceError (carrying the best estimate and its error bound)
/// if the tolerances are not met within max_subdivisions.
QuadratureResult integrate_semi_infinite(const std::function<double(double)>& f,
                                         const QuadratureSpec& spec = {},
                                         double scale = 1.0);

/// Dense square matrix, row-major. Small sizes only (2x2 Fisher blocks up to
/// a few hundred for delay covariances).
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::size_t size() const { return n_; }

private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Lower-triangular L with L*L^T = A. The pivot floor is 1e-12 times the
/// largest diagonal entry of A; a pivot at or below the floor throws
/// NotPsdError. A must be symmetric (checked).
SquareMatrix cholesky(const SquareMatrix& a);

/// Neumaier compensated accumulator. Keeps long sums (10^6 cross terms in the
/// pairwise Fisher denominator) accurate to ~1 ulp of the true sum.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace locbound::numerics
