#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iiss/certificates.hpp"
#include "iiss/sequences.hpp"
#include "iiss/simulator.hpp"

namespace iiss::config {

inline constexpr int kSchemaVersion = 1;

/// Either a preset name or expression definitions. Expressions use the
/// variables t, x0..x{n-1}, u0..u{m-1}.
struct SystemSpec {
  std::string preset;
  int n = 1;
  int m = 0;
  std::vector<std::string> f;
  std::vector<std::string> g;
  std::string h;   // empty: Euclidean norm
  std::string h0;  // empty: Euclidean norm

  bool operator==(const SystemSpec&) const = default;
};

/// Lyapunov candidate in the expression grammar. V uses t and x0..; the
/// rates use s; p uses t. `phi` is |φ|, with the sign carried by `regime`.
struct CandidateSpec {
  std::string V;
  std::string phi1;
  std::string phi2;
  std::string chi;
  std::string pi;
  std::string phi;
  std::string psi;
  std::vector<double> phi_breakpoints;
  std::vector<double> psi_breakpoints;
  std::string p = "1";
  std::string p_hint = "constant";  // none, constant, constant-after, periodic, monotone
  double p_period = 0.0;
  double p_t_max = 0.0;
  std::string regime = "decay";
  bool escape_declared_divergent = false;

  bool operator==(const CandidateSpec&) const = default;
};

struct CertifySpec {
  std::vector<double> theta;  // one verdict per entry
  bool validate = true;

  bool operator==(const CertifySpec&) const = default;
};

/// kind: none, explicit, adt, reverse-adt, fixed-dwell, example1,
/// example2-slow, example2-fast, example3.
struct SequenceSpec {
  std::string kind = "none";
  double n0 = 0.0;
  double tau = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::vector<double> instants;
  int count = 1;  // seeded draws for the random kinds

  bool operator==(const SequenceSpec&) const = default;
};

/// input: zero, constant (input_value), expression (input_expr in t).
struct ExperimentSpec {
  std::vector<double> t0{0.0};
  std::vector<std::vector<double>> x0;
  std::string input = "zero";
  std::vector<double> input_value;
  std::vector<std::string> input_expr;
  double horizon = 10.0;
  std::string tolerance_profile = "default";
  std::uint64_t seed = 1;
  int threads = 1;

  bool operator==(const ExperimentSpec&) const = default;
};

struct RunConfig {
  int schema = kSchemaVersion;
  SystemSpec system;
  std::optional<CandidateSpec> candidate;
  CertifySpec certify;
  SequenceSpec sequence;
  ExperimentSpec experiment;
  std::string output_dir = "iiss-out";

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a TOML document. Unknown keys, wrong types, a
/// missing or unsupported schema, and inconsistent dimensions throw
/// ConfigError.
RunConfig parse(std::string_view text, std::string_view source = "config");
RunConfig load(const std::filesystem::path& path);
/// TOML text that parses back to an equal RunConfig.
std::string serialize(const RunConfig& cfg);

/// Dimension and reference checks shared by parse() and the CLI overrides.
void validate(const RunConfig& cfg);

ImpulsiveSystem build_system(const RunConfig& cfg);
/// The [candidate] section if present, else the preset's candidate.
std::optional<LyapunovCandidate> build_candidate(const RunConfig& cfg);
/// Preset hash, or FNV-1a of the serialized system and candidate sections.
std::string system_hash(const RunConfig& cfg);

/// `count` draws for the random kinds (seeds derived from `seed`), one
/// sequence for the deterministic kinds, an empty sequence for "none".
std::vector<ImpulseSequence> build_sequences(const SequenceSpec& spec, double horizon,
                                             std::uint64_t seed);
InputSignal build_input(const ExperimentSpec& spec, int m);
Tolerances tolerance_profile(const std::string& name);

FlowRate flow_rate_from(const CandidateSpec& spec);

}  // namespace iiss::config
