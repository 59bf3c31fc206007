#pragma once

#include <functional>
#include <string>
#include <vector>

#include "iiss/ratefns.hpp"
#include "iiss/sequences.hpp"
#include "iiss/simulator.hpp"

namespace iiss {

/// How the tail t → ∞ of a flow rate behaves; needed to turn a finite scan
/// into an inf/sup over [0, ∞).
enum class TailHint { None, Constant, ConstantAfter, Periodic, Monotone };

std::string to_string(TailHint h);

/// Locally integrable flow rate p ≥ 0 with an integration hint.
struct FlowRate {
  std::string name;
  std::function<double(double)> p;
  TailHint hint = TailHint::None;
  double value = 0.0;   // Constant: p ≡ value
  double t_max = 0.0;   // ConstantAfter: p(t) = p(t_max) for t ≥ t_max
  double period = 0.0;  // Periodic
  std::function<double(double)> antiderivative;  // optional P with P' = p
  std::vector<double> breakpoints;

  static FlowRate constant(double c);
  static FlowRate tanh_rate();

  double operator()(double t) const { return p(t); }
  /// ∫_a^b p, closed form when available.
  [[nodiscard]] double integral(double a, double b) const;
};

enum class Regime { Decay, Growth };

std::string to_string(Regime r);

/// (h°,h)-ISS Lyapunov candidate. `phi` holds the magnitude |φ|: φ itself in
/// the decay regime, −φ in the growth regime, so that it is of class P in
/// both cases.
struct LyapunovCandidate {
  std::string name;
  std::function<double(double, const Vec&)> V;
  RateFunction phi1;
  RateFunction phi2;
  RateFunction chi;
  RateFunction pi;
  RateFunction phi;
  RateFunction psi;
  FlowRate p;
  Regime regime = Regime::Decay;
  /// User declaration that ∫_1^∞ ds/(−φ) diverges, overriding the probe.
  bool escape_declared_divergent = false;

  /// The signed rate φ(s).
  [[nodiscard]] double signed_phi(double s) const;
};

struct SearchSpec {
  double a_min = 1e-6;
  double a_max = 1e6;
  std::size_t grid = 2000;
  double arg_tol = 1e-10;  // golden-section tolerance in a (relative)
  double quad_rtol = 1e-9;
  int threads = 1;
};

struct ExtremumResult {
  double value = 0.0;
  double arg = 0.0;
  double quad_error = 0.0;
  bool boundary = false;
  std::vector<std::string> warnings;
};

/// M = sup_a ∫_a^{ψ(a)} ds/φ(s) with φ ∈ P.
ExtremumResult compute_M(const RateFunction& phi, const RateFunction& psi,
                         const SearchSpec& spec = {});

/// M₂ = inf_a ∫_{ψ(a)}^a ds/(−φ(s)); takes neg_phi = −φ ∈ P.
ExtremumResult compute_M2(const RateFunction& neg_phi, const RateFunction& psi,
                          const SearchSpec& spec = {});

enum class ExtremumMode { Inf, Sup };

struct WindowSpec {
  std::size_t grid = 2000;
  double arg_tol = 1e-10;
  double scan_multiple = 100.0;  // hint-free scan covers [0, scan_multiple·θ]
};

/// inf or sup over t ≥ 0 of ∫_t^{t+θ} p. arg is +inf for limits at infinity.
/// Throws InconclusiveError when no hint is given and the scan does not settle.
ExtremumResult compute_N(const FlowRate& p, double theta, ExtremumMode mode,
                         const WindowSpec& spec = {});

enum class EscapeVerdict { DivergentConsistent, Convergent, Inconclusive, DeclaredDivergent };

std::string to_string(EscapeVerdict v);

struct EscapeReport {
  EscapeVerdict verdict = EscapeVerdict::Inconclusive;
  std::vector<double> ladder;    // upper limits A
  std::vector<double> partials;  // ∫_1^A ds/(−φ)
  double limit = 0.0;            // last partial integral
  std::string note;
};

struct EscapeProbe {
  double A_max = 1e12;
  double factor = 10.0;
  double tol = 1e-9;  // increments below tol·max(1, |I|) count as converged
  bool declared_divergent = false;
};

EscapeReport check_escape_integral(const RateFunction& neg_phi, const EscapeProbe& probe = {});

enum class TheoremCase { Thm1a, Thm1b, Thm1c, Thm2, Inconclusive };
enum class Strength { Weak, Strong, None };

std::string to_string(TheoremCase c);
std::string to_string(Strength s);

struct StabilityVerdict {
  TheoremCase theorem = TheoremCase::Inconclusive;
  double M = 0.0;
  double N = 0.0;
  double theta = 0.0;
  std::string class_kind;  // "Sup", "Sdn", "Gamma", "UIB"
  double class_rho = 0.0;
  std::string class_text;
  Strength strength = Strength::None;
  std::vector<std::string> warnings;
  double a_star = 0.0;
  double t_star = 0.0;
  double quadrature_error = 0.0;
  std::optional<EscapeReport> escape;

  [[nodiscard]] bool conclusive() const noexcept { return theorem != TheoremCase::Inconclusive; }
};

struct VerdictOptions {
  double tol_zero = 1e-8;
  SearchSpec search;
  WindowSpec window;
  EscapeProbe escape;
};

StabilityVerdict theorem1_verdict(const LyapunovCandidate& cand, double theta,
                                  const VerdictOptions& opts = {});
StabilityVerdict theorem2_verdict(const LyapunovCandidate& cand, double theta,
                                  const VerdictOptions& opts = {});

/// Sample points for the falsifier. For n = 1 (and m ≤ 1) the grids are
/// tensor products; higher dimensions draw `random_points` uniform samples
/// from the boxes.
struct CandidateSampleSpec {
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0};
  double xi_box = 5.0;
  std::size_t xi_count = 201;
  double mu_box = 2.0;
  std::size_t mu_count = 41;
  std::size_t random_points = 2000;
  std::uint64_t seed = 1;
  std::vector<double> dini_steps{1e-4, 1e-5, 1e-6};
  double margin_tol = 1e-3;
};

struct CandidateViolation {
  std::string condition;  // "bound1-lower", "bound1-upper", "b-i", "b-ii", "b-iii", "non-finite"
  double t = 0.0;
  Vec xi;
  Vec mu;
  double lhs = 0.0;
  double rhs = 0.0;
  [[nodiscard]] double margin() const { return rhs - lhs; }
};

struct CandidateReport {
  std::size_t points = 0;
  std::vector<CandidateViolation> violations;
  double worst_margin_bi = std::numeric_limits<double>::infinity();
  double worst_margin_bii = std::numeric_limits<double>::infinity();
  double worst_margin_biii = std::numeric_limits<double>::infinity();
  double worst_margin_bound1 = std::numeric_limits<double>::infinity();
  [[nodiscard]] bool clean() const noexcept { return violations.empty(); }
};

/// Sampled falsification of the candidate conditions a) and b-i/ii/iii.
CandidateReport validate_candidate(const LyapunovCandidate& cand, const ImpulsiveSystem& sys,
                                   const CandidateSampleSpec& spec = {});

}  // namespace iiss
