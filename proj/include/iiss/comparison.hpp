#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iiss/certificates.hpp"
#include "iiss/ratefns.hpp"
#include "iiss/sequences.hpp"

namespace iiss {

/// Scalar comparison system ż = −p(t)φ(z) off γ, z = ψ(z⁻) on γ. `phi` holds
/// |φ| (class P) and `regime` fixes the sign, as in LyapunovCandidate.
struct ComparisonSpec {
  FlowRate p;
  RateFunction phi;
  RateFunction psi;
  Regime regime = Regime::Decay;

  static ComparisonSpec from_candidate(const LyapunovCandidate& cand);
};

/// F(r) = ∫_1^r ds/|φ(s)| on (0, ∞) with its range (a, b) and inverse. Closed
/// forms are used when the rate carries a reciprocal antiderivative; otherwise
/// F is a log-substituted quadrature and F⁻¹ a safeguarded Newton solve.
class FlowTransform {
 public:
  explicit FlowTransform(RateFunction rate);

  /// F(r) for r > 0; F(0) returns the lower endpoint a.
  double operator()(double r) const;
  /// r with F(r) = y; 0 for y ≤ a and +inf for y ≥ b.
  [[nodiscard]] double inverse(double y) const;
  [[nodiscard]] double lower() const noexcept { return a_; }
  [[nodiscard]] double upper() const noexcept { return b_; }
  [[nodiscard]] bool closed_form() const noexcept { return rate_.has_reciprocal_antiderivative(); }
  [[nodiscard]] const RateFunction& rate() const noexcept { return rate_; }

 private:
  RateFunction rate_;
  double G1_ = 0.0;
  double a_ = 0.0;
  double b_ = 0.0;
};

enum class JumpLaw { Psi, PsiBar };

class ComparisonSystem {
 public:
  explicit ComparisonSystem(ComparisonSpec spec);

  [[nodiscard]] const ComparisonSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const FlowTransform& transform() const noexcept { return F_; }
  /// Jump majorant: max{ψ, id} in the decay regime, the running max of ψ in
  /// the growth regime. Both are nondecreasing.
  [[nodiscard]] const RateFunction& psi_bar() const noexcept { return psi_bar_; }

  /// Solution of the flow equation from w(t0) = w0, evaluated at t ≥ t0.
  /// Decay: absorbs at 0. Growth: throws EscapeError if t is past the
  /// finite escape time.
  [[nodiscard]] double flow(double t0, double w0, double t) const;
  [[nodiscard]] double jump(double z, JumpLaw law) const;

 private:
  ComparisonSpec spec_;
  FlowTransform F_;
  RateFunction psi_bar_;
};

double flow_solution(const ComparisonSystem& sys, double t0, double w0, double t);

/// Piecewise boundary solution of the comparison system; evaluable at any t
/// in [t0, t_end].
class ComparisonTrajectory {
 public:
  struct Segment {
    double start = 0.0;
    double z_start = 0.0;  // right limit at start (post-jump)
    double end = 0.0;
    double z_end = 0.0;  // left limit at end
  };

  ComparisonTrajectory(std::shared_ptr<const ComparisonSystem> sys, double t0, double z0);

  [[nodiscard]] double t0() const noexcept { return t0_; }
  [[nodiscard]] double z0() const noexcept { return z0_; }
  [[nodiscard]] double t_end() const noexcept { return segments_.back().end; }
  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
  [[nodiscard]] const ImpulseSequence& gamma() const noexcept { return gamma_; }

  /// Right-continuous value z(t).
  [[nodiscard]] double at(double t) const;
  /// n(t0, t].
  [[nodiscard]] std::size_t jumps_until(double t) const;
  /// Time grid with spacing ≤ dt inside each segment plus both one-sided
  /// values at every jump. `jumps` counts the jumps applied to z so far, so
  /// the left-limit sample at τ_k carries k − 1.
  struct Sample {
    double t;
    double z;
    bool is_jump;
    std::size_t jumps;
  };
  [[nodiscard]] std::vector<Sample> sample(double dt) const;
  [[nodiscard]] std::string csv(double dt) const;

 private:
  friend ComparisonTrajectory solve_comparison(std::shared_ptr<const ComparisonSystem>,
                                               const ImpulseSequence&, double, double, double,
                                               JumpLaw);
  std::shared_ptr<const ComparisonSystem> sys_;
  double t0_ = 0.0;
  double z0_ = 0.0;
  std::vector<Segment> segments_;
  ImpulseSequence gamma_;
};

/// Flows between impulses and applies z(τ) = ψ(z(τ⁻)) (or ψ̄) on γ ∩ (t0, horizon].
ComparisonTrajectory solve_comparison(std::shared_ptr<const ComparisonSystem> sys,
                                      const ImpulseSequence& gamma, double t0, double z0,
                                      double horizon, JumpLaw law = JumpLaw::Psi);

/// w_0 = w0, w_{k+1} = ψ̄(w_k), k = 0..k_max.
std::vector<double> jump_recursion(const RateFunction& psi_bar, double w0, std::size_t k_max);

/// Budgets and the class witness T(ε) fed to the envelope constructions.
struct EnvelopeInputs {
  double M = 0.0;
  double N = 0.0;
  double theta = 0.0;
  std::function<double(double)> T_of_eps;
  std::optional<double> eps0;  // overrides δ/(2θM)
};

enum class EnvelopeKind { Prop1, Prop2 };

struct DecayEnvelope {
  EnvelopeKind kind = EnvelopeKind::Prop1;
  double M = 0.0;
  double N = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  double eps0 = 0.0;
  double T_eps0 = 0.0;
  std::size_t m0 = 0;
  double T0 = 0.0;
  std::size_t k0 = 0;
  RateFunction eta;  // ψ̄^{k₀}, decay envelope only
  std::shared_ptr<const ComparisonSystem> system;

  /// Guaranteed F-descent per window of length T₀ (decay envelope).
  [[nodiscard]] double window_descent() const { return 0.5 * static_cast<double>(m0) * delta; }
  [[nodiscard]] double nu(double r) const;
  [[nodiscard]] double beta1(double r, double s) const;
  [[nodiscard]] double beta2(double r, double s) const;
  [[nodiscard]] double beta3(double r, double s) const;
  [[nodiscard]] double kappa() const { return 0.5 * (1.0 / theta - eps0); }
  /// β₃(r, n/2 + max{κ(elapsed − T₀), 0}).
  [[nodiscard]] double final_bound(double r, double elapsed, double n) const;
  [[nodiscard]] KLFunction beta3_kl() const;
  [[nodiscard]] std::string json() const;
};

DecayEnvelope build_envelope_prop1(std::shared_ptr<const ComparisonSystem> sys,
                                   const EnvelopeInputs& in);
DecayEnvelope build_envelope_prop2(std::shared_ptr<const ComparisonSystem> sys,
                                   const EnvelopeInputs& in);

struct DescentReport {
  bool pass = true;
  std::size_t windows = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_start = 0.0;
};

/// Checks F(z(t0+(ℓ−1)T₀)) − F(z(t0+ℓT₀)) ≥ m₀δ/2 on every window inside the
/// trajectory while z stays positive.
DescentReport check_window_descent(const ComparisonTrajectory& z, const DecayEnvelope& env,
                                   double tol = 1e-9);

}  // namespace iiss
