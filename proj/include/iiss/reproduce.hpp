#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iiss/simulator.hpp"

namespace iiss::reproduce {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct BundleReport {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::string> files;  // relative to the bundle directory

  [[nodiscard]] bool pass() const;
  [[nodiscard]] std::string summary_json() const;
};

struct BundleOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  Tolerances tol;
};

/// "example-5.1", "example-5.2", "lemma1-suite", "example-sequences".
std::vector<std::string> bundle_names();

/// Runs the named bundle and writes its artifacts and summary.json into
/// `dir`. Artifact bytes depend only on the name and the options' seed and
/// tolerances, never on the thread count.
BundleReport run_bundle(const std::string& name, const std::filesystem::path& dir,
                        const BundleOptions& opts);

}  // namespace iiss::reproduce
