#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "iiss/comparison.hpp"
#include "iiss/ratefns.hpp"
#include "iiss/simulator.hpp"

namespace iiss {

/// One run reduced to its measure h(t, x(t)) on the stored grid, with the
/// jump count n(t0, t] that applied to each sample.
struct MeasuredRun {
  std::string label;
  double t0 = 0.0;
  double h0 = 0.0;  // h°(t0, x0)
  double input_norm = 0.0;
  bool complete = true;  // false for truncated or failed runs
  std::vector<double> t;
  std::vector<double> h;
  std::vector<std::size_t> jumps;
};

MeasuredRun measure(const Trajectory& tr, const ImpulsiveSystem& sys);
/// Comparison runs: h = z, h° = z0.
MeasuredRun measure(const ComparisonTrajectory& z, double dt);

enum class AbscissaMode { Weak, Strong };

std::string to_string(AbscissaMode m);

/// Monotone-decay sign test: over consecutive nonempty bins, counts decreases
/// versus increases (ties dropped) and takes the one-sided binomial p-value.
struct DecayTest {
  std::size_t decreases = 0;
  std::size_t increases = 0;
  double p_value = 1.0;
  bool decaying = false;
};

DecayTest sign_test(const std::vector<double>& series, double alpha = 0.01);

struct GainCurve;

struct EnvelopeOptions {
  AbscissaMode mode = AbscissaMode::Weak;
  std::size_t bins = 200;
  std::vector<double> h0_edges;  // bucket upper edges; empty = one bucket
  double max_abscissa = 0.0;     // 0 = largest abscissa in the data
  const GainCurve* gain = nullptr;
};

struct EnvelopeEstimate {
  AbscissaMode mode = AbscissaMode::Weak;
  std::vector<double> h0_edges;
  std::vector<double> bin_edges;
  std::vector<std::vector<double>> sup;  // [bucket][bin]; NaN marks an empty bin
  DecayTest decay;

  /// Sup over all buckets per bin (NaN where every bucket is empty).
  [[nodiscard]] std::vector<double> overall() const;
  /// β(r, s): the running sup from bin(s) onward over every bucket whose
  /// range starts at or below r. +inf for r above the largest edge.
  [[nodiscard]] KLFunction as_kl() const;
  [[nodiscard]] std::string csv() const;
};

EnvelopeEstimate build_envelope(const std::vector<MeasuredRun>& runs, const EnvelopeOptions& opts);

struct BoundReport {
  bool pass = true;
  std::size_t checked = 0;
  std::size_t vacuous = 0;  // samples where the bound overflowed or was infinite
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_run = 0;
  double worst_t = 0.0;
};

struct BoundTolerance {
  double atol = 1e-9;
  double rtol = 1e-9;
};

/// bound(h0, elapsed, n) against every sample of every run.
using RunBound = std::function<double(double, double, double)>;

BoundReport guas_check(const std::vector<MeasuredRun>& runs, const RunBound& bound,
                       const BoundTolerance& tol = {});
/// h ≤ β(h0, elapsed) (weak) or β(h0, elapsed + n) (strong).
BoundReport guas_check(const std::vector<MeasuredRun>& runs, const KLFunction& beta,
                       AbscissaMode mode, const BoundTolerance& tol = {});
/// h ≤ α(h0) everywhere.
BoundReport check_gus(const std::vector<MeasuredRun>& runs, const RateFunction& alpha,
                      const BoundTolerance& tol = {});

struct AttractivityEntry {
  double eps = 0.0;
  double R = 0.0;
  std::optional<double> T;  // empty: not attained within the horizon
  std::size_t runs = 0;
};

struct AttractivityTable {
  std::vector<AttractivityEntry> entries;
  [[nodiscard]] std::string csv() const;
};

/// Smallest multiple T of `resolution` with h ≤ ε from t0 + T onward, over
/// every run with h0 ≤ R.
AttractivityTable estimate_attractivity(const std::vector<MeasuredRun>& runs,
                                        const std::vector<double>& eps,
                                        const std::vector<double>& R, double resolution);

struct GainCurve {
  std::vector<double> amplitude;
  std::vector<double> raw;
  std::vector<double> regressed;

  /// Linear interpolation of the regressed curve; constant beyond the ends.
  double operator()(double a) const;
  [[nodiscard]] std::string csv() const;
};

struct GainSpec {
  std::vector<ImpulseSequence> sequences;
  std::vector<Vec> x0s;
  double t0 = 0.0;
  double horizon = 100.0;
  double late_fraction = 0.2;
  Tolerances tol;
  int threads = 1;
};

/// Late-window sup of h under constant inputs of each amplitude (sorted
/// ascending). A failed or truncated run makes the gain infinite from that
/// amplitude on.
GainCurve iss_gain(const ImpulsiveSystem& sys, const GainSpec& spec,
                   const std::vector<double>& amplitudes);

/// Least-squares nondecreasing fit (pool adjacent violators).
std::vector<double> pava_nondecreasing(const std::vector<double>& y);

}  // namespace iiss
