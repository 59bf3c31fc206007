#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "iiss/certificates.hpp"
#include "iiss/sequences.hpp"
#include "iiss/simulator.hpp"

namespace iiss {

/// Code-defined system + candidate bundle with pinned constants.
struct Preset {
  std::string name;
  std::string provenance;
  ImpulsiveSystem system;
  LyapunovCandidate candidate;
  double theta = 0.0;
  ClassDescriptor sequence_class;  // default class for experiments
  std::string canonical;           // text the hash is taken over
  std::string hash;                // FNV-1a of `canonical`, 16 hex digits
};

/// "example-5.1" (destabilizing jumps, stabilizing flow) and "example-5.2"
/// (stabilizing jumps, destabilizing time-varying flow).
const Preset& get_preset(const std::string& name);
std::vector<std::string> preset_names();

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

}  // namespace iiss
