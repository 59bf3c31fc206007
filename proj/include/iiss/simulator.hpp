#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iiss/sequences.hpp"

namespace iiss {

using Vec = Eigen::VectorXd;

/// ẋ = f(t, x, u) off γ and x(τ) = x(τ⁻) + g(τ, x(τ⁻), u(τ)) on γ, with the
/// measures h (along trajectories) and h° (of initial data).
struct ImpulsiveSystem {
  using Map = std::function<Vec(double, const Vec&, const Vec&)>;
  using Measure = std::function<double(double, const Vec&)>;

  std::string name;
  int n = 1;
  int m = 0;
  Map f;
  Map g;
  Measure h = [](double, const Vec& x) { return x.norm(); };
  Measure h0 = [](double, const Vec& x) { return x.norm(); };

  /// Probes f and g once at (0, 0, 0) and checks output dimensions.
  void validate() const;
};

/// Input signal u : t ↦ ℝᵐ, pointwise defined (so u(τ_k) is meaningful).
/// Declared breakpoints mark discontinuities; the integrator never steps
/// across one.
struct InputSignal {
  std::function<Vec(double)> eval;
  int dim = 0;
  std::vector<double> breakpoints;
  std::string label = "zero";

  static InputSignal zero(int m);
  static InputSignal constant(const Vec& value);
  /// Zero everywhere except u(τ_k) = value at the given instants.
  static InputSignal impulse_only(const Vec& value, std::vector<double> instants);

  Vec operator()(double t) const { return eval(t); }
};

struct Tolerances {
  double atol = 1e-9;
  double rtol = 1e-8;
  double h_init = 1e-3;
  double h_min = 1e-13;
  double h_max = 0.5;
  long max_steps = 5'000'000;
  double blowup = 1e9;

  static Tolerances tight();
};

struct StateSample {
  double t = 0.0;
  Vec x;
  int segment = 0;
  bool is_jump = false;  // first sample of a segment that started with a jump
};

struct JumpRecord {
  double t = 0.0;
  Vec before;
  Vec after;
  Vec increment;  // g(τ, x(τ⁻), u(τ)) exactly as applied
};

/// Piecewise absolutely continuous solution on [t0, t_end]. Segment k covers
/// [start_k, start_{k+1}); every impulse in (t0, t_end] opens a new segment.
struct Trajectory {
  double t0 = 0.0;
  double t_end = 0.0;  // T_x for truncated runs, the horizon otherwise
  bool truncated = false;
  std::vector<StateSample> samples;
  std::vector<JumpRecord> jumps;
  ImpulseSequence gamma;
  long steps = 0;
  long rejected = 0;

  [[nodiscard]] const Vec& final_state() const { return samples.back().x; }
  /// n(t0, t] for t ≤ t_end, counting jumps actually applied.
  [[nodiscard]] std::size_t jumps_until(double t) const;
};

/// Dormand–Prince 5(4) between impulses, landing exactly on each τ_k and on
/// input breakpoints. Throws IntegrationError on step-size underflow or
/// non-finite flow values.
Trajectory integrate(const ImpulsiveSystem& sys, const ImpulseSequence& gamma, double t0,
                     const Vec& x0, const InputSignal& u, double horizon,
                     const Tolerances& tol = {});

/// max{ess sup_{(s,t]} |u|, sup_{τ ∈ γ ∩ (s,t]} |u(τ)|}. The first term is a
/// dense-sampling lower estimate; the second is exact.
double input_norm(const InputSignal& u, const ImpulseSequence& gamma, double s, double t,
                  double samples_per_unit = 1e4);

struct RunSpec {
  ImpulseSequence gamma;
  double t0 = 0.0;
  Vec x0;
  InputSignal u;
  std::uint64_t seed = 0;  // the seed that produced gamma, for the manifest
  std::string label;
};

struct RunResult {
  RunSpec spec;
  std::optional<Trajectory> trajectory;
  std::string error;  // empty on success
};

/// Independent integrate() calls, parallel over runs; results keep run order.
std::vector<RunResult> ensemble(const ImpulsiveSystem& sys, const std::vector<RunSpec>& runs,
                                double horizon, const Tolerances& tol, int threads);

/// Deterministic per-run seed derived from a master seed and the run index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

std::string trajectory_csv(const Trajectory& tr);
std::string jumps_csv(const Trajectory& tr);

}  // namespace iiss
