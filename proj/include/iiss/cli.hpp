#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iiss/certificates.hpp"
#include "iiss/config.hpp"

namespace iiss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitViolation = 3;

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "IISS_OUT_DIR";

struct Result {
  int exit_code = kExitOk;
  std::string text;  // human-readable summary, one finding per line
  std::vector<StabilityVerdict> verdicts;
  std::filesystem::path out_dir;
};

/// Global flags; unset fields fall back to the config, then to defaults.
struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> tolerance_profile;
};

struct CertifyOptions {
  std::string preset;
  std::vector<double> theta;
  bool no_validate = false;
};

struct SimulateOptions {
  std::string preset;
  std::optional<int> seeds;
  std::optional<std::vector<double>> explicit_instants;
  std::optional<double> horizon;
  bool no_impulses = false;
  std::vector<std::vector<double>> x0;
  std::vector<double> t0;
  bool plot = false;
};

struct ClassifyOptions {
  std::string name;  // example1, example2-slow, example2-fast, example3 or empty
  std::optional<std::pair<double, double>> adt_gen;
  std::optional<std::pair<double, double>> reverse_adt_gen;
  std::optional<std::pair<double, double>> fixed_dwell;
  std::optional<std::vector<double>> explicit_instants;
  std::vector<std::pair<double, double>> adt;
  std::vector<std::pair<double, double>> check_freq;
  std::vector<int> n0;
  std::optional<double> horizon;
};

/// Resolves the run configuration: the --config file, else the named
/// preset, with the global overrides applied.
config::RunConfig resolve_config(const GlobalOptions& g, const std::string& preset);
/// --out, then $IISS_OUT_DIR, then the config's output directory.
std::filesystem::path resolve_out_dir(const GlobalOptions& g, const config::RunConfig& cfg);

Result cmd_certify(const GlobalOptions& g, const CertifyOptions& o);
Result cmd_simulate(const GlobalOptions& g, const SimulateOptions& o);
Result cmd_classify(const GlobalOptions& g, const ClassifyOptions& o);
/// `name` is a bundle name or "all".
Result cmd_reproduce(const GlobalOptions& g, const std::string& name);

/// Parses a full command line (without the program name) and dispatches.
/// Errors are reported in the result text with exit code 1.
Result run(const std::vector<std::string>& args);

}  // namespace iiss::cli
