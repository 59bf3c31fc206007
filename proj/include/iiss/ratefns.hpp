#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "iiss/numerics.hpp"

namespace iiss {

/// Comparison-function classes a rate can be declared to belong to.
enum class RateClass { Cstar, P, K, Kinf, Generic };

std::string to_string(RateClass c);
RateClass rate_class_from_string(const std::string& s);

/// Scalar function on [0, domain_max] with a declared class tag.
///
/// The tag is a claim made by whoever constructs the rate; verify_class
/// checks it on sample grids. Piecewise rates list their breakpoints so that
/// quadrature splits there. An optional closed-form antiderivative of 1/f
/// (and its inverse) short-circuits every reciprocal integral.
class RateFunction {
 public:
  using Fn = std::function<double(double)>;

  RateFunction();  // identity
  RateFunction(std::string name, Fn f, RateClass tag = RateClass::Generic);

  static RateFunction identity();
  static RateFunction linear(double slope);

  RateFunction& with_breakpoints(std::vector<double> breaks);
  RateFunction& with_domain_max(double s_max);
  RateFunction& with_inverse(Fn inverse);
  /// G with G'(s) = 1/f(s) on (0, domain_max), continuous across breakpoints.
  RateFunction& with_reciprocal_antiderivative(Fn G, Fn G_inverse = {});
  RateFunction& with_name(std::string name);
  RateFunction& with_tag(RateClass tag);

  /// Evaluates f(s); throws DomainError for s < 0 or s > domain_max.
  double operator()(double s) const;

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] RateClass tag() const noexcept { return tag_; }
  [[nodiscard]] double domain_max() const noexcept { return domain_max_; }
  [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  [[nodiscard]] bool is_identity() const noexcept { return identity_; }
  [[nodiscard]] bool has_inverse() const noexcept { return static_cast<bool>(inverse_); }
  [[nodiscard]] const Fn& closed_inverse() const noexcept { return inverse_; }
  [[nodiscard]] bool has_reciprocal_antiderivative() const noexcept {
    return static_cast<bool>(recip_antideriv_);
  }
  [[nodiscard]] const Fn& reciprocal_antiderivative() const noexcept { return recip_antideriv_; }
  [[nodiscard]] const Fn& reciprocal_antiderivative_inverse() const noexcept {
    return recip_antideriv_inverse_;
  }

 private:
  std::string name_;
  Fn f_;
  RateClass tag_ = RateClass::Generic;
  double domain_max_ = std::numeric_limits<double>::infinity();
  std::vector<double> breaks_;
  Fn inverse_;
  Fn recip_antideriv_;
  Fn recip_antideriv_inverse_;
  bool identity_ = false;
};

/// Two-argument comparison function (r, t) -> value, expected of class KL.
class KLFunction {
 public:
  using Fn = std::function<double(double, double)>;
  KLFunction() = default;
  KLFunction(std::string name, Fn f) : name_(std::move(name)), f_(std::move(f)) {}
  double operator()(double r, double t) const { return f_(r, t); }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] explicit operator bool() const noexcept { return static_cast<bool>(f_); }

 private:
  std::string name_;
  Fn f_;
};

struct SampleGrid {
  double lo = 0.0;
  double hi = 10.0;
  std::size_t count = 1001;
  bool logarithmic = false;  // log spacing on [max(lo, 1e-9), hi], plus 0 if lo == 0

  [[nodiscard]] std::vector<double> points() const;
};

struct Violation {
  std::string predicate;
  double at = 0.0;
  double value = 0.0;
};

struct ClassReport {
  RateClass tag = RateClass::Generic;
  std::vector<Violation> violations;
  std::size_t points_checked = 0;

  [[nodiscard]] bool consistent() const noexcept { return violations.empty(); }
};

/// Checks the predicates of `tag` on the grid and lists every violation.
ClassReport verify_class(const RateFunction& f, RateClass tag, const SampleGrid& grid);

struct InvertTolerance {
  double atol = 1e-12;
  double rtol = 1e-10;
  int max_steps = 200;
};

/// x with f(x) = y for f of class K/Kinf, by bracketing bisection.
/// Throws RangeError if y is outside the achievable range.
double invert(const RateFunction& f, double y, const InvertTolerance& tol = {});

/// k-fold composition f∘…∘f; k = 0 is the identity. Evaluating the result
/// throws DomainError when an intermediate value leaves f's domain.
RateFunction iterate(const RateFunction& f, std::size_t k);

/// outer ∘ inner.
RateFunction compose(const RateFunction& outer, const RateFunction& inner);

/// s ↦ max{f(s), s}.
RateFunction max_with_identity(const RateFunction& f);

struct MajorizeGrid {
  double lo = 1e-6;
  double hi = 1e6;
  std::size_t count = 2000;
  int refine_depth = 6;
  double refine_tol = 1e-9;
};

/// Running maximum r ↦ max_{0 ≤ s ≤ r} f(s), tabulated on an adaptively refined
/// grid (recorded in the returned function's breakpoints) and linearly
/// interpolated between nodes.
RateFunction majorize_nondecreasing(const RateFunction& f, const MajorizeGrid& grid = {});

/// ∫_lo^hi ds / f(s), signed. Uses the closed-form antiderivative of 1/f when
/// present; otherwise adaptive Simpson in log-coordinates split at breakpoints.
num::QuadResult reciprocal_integral(const RateFunction& f, double lo, double hi,
                                    double rtol = 1e-10);

struct KLReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool consistent() const noexcept { return violations.empty(); }
};

/// Sampled KL shape check: nondecreasing in r with β(0,t)=0, nonincreasing in t.
KLReport verify_kl(const KLFunction& beta, const std::vector<double>& r_grid,
                   const std::vector<double>& t_grid, double tol = 1e-12);

}  // namespace iiss
