#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace iiss::num {

using ScalarFn = std::function<double(double)>;

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated Richardson estimate
  long evaluations = 0;
};

/// Adaptive Simpson quadrature of f over [a, b]; b < a gives the signed integral.
/// Throws QuadratureError on non-finite integrand values or exhausted depth.
QuadResult adaptive_simpson(const ScalarFn& f, double a, double b, double rtol = 1e-9,
                            double atol = 1e-14, int max_depth = 48);

/// Same as adaptive_simpson, with mandatory subdivision at every breakpoint
/// strictly inside (min(a,b), max(a,b)).
QuadResult integrate_split(const ScalarFn& f, double a, double b, std::span<const double> breaks,
                           double rtol = 1e-9, double atol = 1e-14);

struct Extremum {
  double arg = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
Extremum golden_max(const ScalarFn& f, double lo, double hi, double tol);

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
Extremum golden_min(const ScalarFn& f, double lo, double hi, double tol);

/// count points geometrically spaced from lo to hi inclusive (lo > 0).
std::vector<double> log_grid(double lo, double hi, std::size_t count);

std::vector<double> linear_grid(double lo, double hi, std::size_t count);

/// log(sinh(x)) for x > 0, without overflow for large x or cancellation for small x.
double log_sinh(double x);

/// Inverse of log_sinh: the x > 0 with log(sinh(x)) == y.
double log_sinh_inverse(double y);

/// log(cosh(x)) without overflow.
double log_cosh(double x);

}  // namespace iiss::num
