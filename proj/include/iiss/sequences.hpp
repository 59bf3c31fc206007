#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace iiss {

/// Materialized impulse-time sequence: strictly increasing, positive instants,
/// known completely on (0, horizon]. Generators stop at the horizon; counting
/// queries past it raise HorizonError. A finite explicit list may carry an
/// infinite horizon, meaning no further impulses ever occur.
class ImpulseSequence {
 public:
  ImpulseSequence() = default;
  /// Instants beyond `horizon` are dropped; throws PreconditionError if the
  /// remaining instants are not strictly increasing and positive.
  ImpulseSequence(std::vector<double> instants, double horizon, std::string label = "explicit");

  [[nodiscard]] const std::vector<double>& instants() const noexcept { return tau_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] std::size_t size() const noexcept { return tau_.size(); }
  [[nodiscard]] bool empty() const noexcept { return tau_.empty(); }

  /// τ_k, 1-based.
  [[nodiscard]] double at(std::size_t k) const;

  /// n(s, t] = #{k : s < τ_k ≤ t}.
  [[nodiscard]] std::size_t count(double s, double t) const;

  /// Instants in (s, t].
  [[nodiscard]] std::vector<double> between(double s, double t) const;

  /// Same instants restricted to (0, h] with horizon h ≤ horizon().
  [[nodiscard]] ImpulseSequence truncated(double h) const;

  /// Newline-delimited instants in shortest round-trip form.
  [[nodiscard]] std::string serialize() const;
  static ImpulseSequence deserialize(const std::string& text, double horizon);

 private:
  void require_within(double t) const;

  std::vector<double> tau_;
  double horizon_ = std::numeric_limits<double>::infinity();
  std::string label_ = "explicit";
};

enum class SequenceClass { ADT, ReverseADT, FixedDwell, FreqUpper, FreqLower, UniformLimit };

std::string to_string(SequenceClass c);

/// Class descriptor with optional uniformity witness ε ↦ T(ε).
struct ClassDescriptor {
  SequenceClass kind = SequenceClass::FreqUpper;
  double n0 = 0.0;     // ADT / ReverseADT
  double tau = 0.0;    // ADT / ReverseADT
  double theta1 = 0.0;  // FixedDwell
  double theta2 = 0.0;  // FixedDwell
  double rho = 0.0;    // FreqUpper / FreqLower / UniformLimit
  std::function<double(double)> witness;

  static ClassDescriptor adt(double n0, double tau);
  static ClassDescriptor reverse_adt(double n0, double tau);
  static ClassDescriptor fixed_dwell(double theta1, double theta2);
  static ClassDescriptor freq_upper(double rho);
  static ClassDescriptor freq_lower(double rho);

  /// Throws PreconditionError on τ ≤ 0, θ₁ > θ₂ or ρ < 0.
  void validate() const;
  [[nodiscard]] std::string describe() const;
};

// Generators. All are deterministic per seed and materialize (0, horizon].

/// Random member of Sad(n₀, τ): exponential gaps of mean τ, rejected against
/// the bound n(s,t] ≤ n₀ + (t−s)/τ.
ImpulseSequence make_adt(std::size_t n0, double tau, std::uint64_t seed, double horizon);

/// Random member of Srad(n₀, τ): n(s,t] ≥ (t−s)/τ − n₀.
ImpulseSequence make_reverse_adt(std::size_t n0, double tau, std::uint64_t seed, double horizon);

/// Gaps uniform on [θ₁, θ₂], first instant in (0, θ₂].
ImpulseSequence make_fixed_dwell(double theta1, double theta2, std::uint64_t seed, double horizon);

/// Concatenated blocks of 3·2^{ℓ−2} equally spaced instants on [2^ℓ − 1, 2^ℓ].
ImpulseSequence make_example1(double horizon);

enum class Example2Direction { Slow, Fast };

/// τ_k = k ∓ Σ_{ℓ=2}^k 1/ℓ (slow: minus, fast: plus).
ImpulseSequence make_example2(Example2Direction direction, double horizon);

/// Blocks of n₀ instants at 1 + (ℓ−1)n₀ + k/(ℓ−1+n₀).
ImpulseSequence make_example3(std::size_t n0, double horizon);

/// Each instant moved within [τ_k − Δ, τ_k + Δ], kept positive and increasing.
/// The result is materialized on (0, horizon − Δ] since later instants of the
/// source are unknown.
ImpulseSequence delta_perturb(const ImpulseSequence& gamma, double delta, std::uint64_t seed);

struct AdtCheck {
  bool pass = true;
  double s = 0.0;  // witness window (s, t]
  double t = 0.0;
  std::size_t count = 0;
  double bound = 0.0;  // n₀ + (t−s)/τ at the witness
};

/// Exact check of n(s,t] ≤ n₀ + (t−s)/τ over (0, horizon].
AdtCheck verify_adt(const ImpulseSequence& gamma, double n0, double tau, double horizon);

/// Exact check of n(s,t] ≥ (t−s)/τ − n₀ over windows inside [0, horizon].
AdtCheck verify_reverse_adt(const ImpulseSequence& gamma, double n0, double tau, double horizon);

struct FrequencyReport {
  double T = 0.0;
  double rho_sup = 0.0;
  double rho_inf = 0.0;
  double horizon = 0.0;
  double argmax_s = 0.0;
  double argmin_s = 0.0;
};

/// Exact sup/inf of n(s, s+T]/T over s ∈ [0, horizon − T].
FrequencyReport estimate_frequency(const ImpulseSequence& gamma, double T, double horizon);

std::string frequency_csv(const std::vector<FrequencyReport>& reports);

enum class FrequencyMode { Upper, Lower };

struct WindowCheck {
  bool pass = true;
  double s = 0.0;  // violating window (s, t]
  double t = 0.0;
  std::size_t count = 0;
};

/// Exact test that every window (s, t] ⊂ [0, horizon] with t − s ≥ T_min has
/// n(s,t]/(t−s) ≤ rate (Upper) or ≥ rate (Lower).
WindowCheck check_window_frequency(const ImpulseSequence& gamma, double rate, double T_min,
                                   FrequencyMode mode, double horizon);

struct FindTOptions {
  double T_start = 0.5;
  double factor = 1.25;
  double rel_tol = 1e-3;  // bisection stops when the bracket is this tight
};

/// Smallest T (within rel_tol) such that every window of length ≥ T respects
/// ρ + ε (Upper) or ρ − ε (Lower); nullopt when no T ≤ horizon/2 passes.
std::optional<double> find_T_for_epsilon(const ImpulseSequence& gamma, double rho, double eps,
                                         double horizon, FrequencyMode mode,
                                         const FindTOptions& opts = {});

struct AdtParams {
  std::size_t n0 = 1;
  double tau = 1.0;
};

/// τ = 1/(ρ+ε), n₀ = ⌈T/τ⌉.
AdtParams derive_adt_params(double rho, double T, double eps);

}  // namespace iiss
