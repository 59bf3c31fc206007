#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iiss/analysis.hpp"
#include "iiss/certificates.hpp"
#include "iiss/comparison.hpp"
#include "iiss/sequences.hpp"
#include "iiss/simulator.hpp"

namespace iiss::reports {

/// Provenance stamped into every JSON report.
struct Context {
  std::string system;
  std::string hash;
  std::optional<std::uint64_t> seed;
  std::optional<Tolerances> tolerances;
  std::optional<double> horizon;
};

std::string verdict_json(const StabilityVerdict& v, const Context& ctx);
/// A θ sweep: one verdict object per entry, in order.
std::string verdicts_json(const std::vector<StabilityVerdict>& v, const Context& ctx);
std::string candidate_json(const CandidateReport& r, const Context& ctx);
std::string envelope_json(const DecayEnvelope& env, const Context& ctx);

struct ManifestEntry {
  std::string label;
  std::uint64_t seed = 0;
  double t0 = 0.0;
  std::vector<double> x0;
  std::string status;  // "ok", "truncated" or the error text
  std::size_t jumps = 0;
  std::vector<std::string> files;
};

std::string manifest_json(const std::vector<ManifestEntry>& runs, const Context& ctx,
                          const std::string& sequence_class, std::size_t failures);

struct ClassifyReport {
  std::string sequence;
  double horizon = 0.0;
  std::size_t impulses = 0;
  struct Adt {
    double n0 = 0.0;
    double tau = 0.0;
    AdtCheck check;
  };
  std::vector<Adt> adt;
  struct FreqCheck {
    double rho = 0.0;
    double eps = 0.0;
    std::optional<double> T;
  };
  std::vector<FreqCheck> freq;
};

std::string classify_json(const ClassifyReport& r);

std::string bound_json(const BoundReport& r);
std::string descent_json(const DescentReport& r);

}  // namespace iiss::reports
