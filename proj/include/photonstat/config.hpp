#pragma once

#include <cstdint>
#include <string>

#include "photonstat/detection.hpp"
#include "photonstat/photonsim.hpp"
#include "photonstat/qdynamics.hpp"

namespace photonstat::cli {

struct AcquisitionSection {
  double bin = 1.0;        ///< correlogram and TAC bin width, ns
  double max_lag = 100.0;  ///< ns
  double tac_range = 500.0;
};

struct RunSection {
  std::uint64_t seed = 1;
  double duration = 1e6;  ///< ns
  std::string out_dir = ".";
};

/// Everything a pipeline run depends on. Times in ns.
struct RunConfig {
  photonsim::MultimodeParams laser;
  qdynamics::CavityModelParams quantum;
  detection::AcquisitionConfig detection;
  AcquisitionSection acquisition;
  RunSection run;

  /// Detection settings with the acquisition section's bin and range applied.
  detection::AcquisitionConfig effective_detection() const;
};

/// Parses TOML-style text: [section] headers, key = value lines, # comments,
/// numbers, quoted strings and [a, b, ...] number lists. Unknown sections or
/// keys are a ParseError; out-of-range values a ValidationError naming the key.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
RunConfig parse_config(const std::string& path);

/// Throws ValidationError naming the first offending key.
void validate(const RunConfig& cfg);

/// Canonical rendering: every key in a fixed order, round-trip precision.
std::string to_text(const RunConfig& cfg);

/// FNV-1a over the canonical text, excluding run.seed and run.out_dir so that
/// the hash identifies the physics and the seed is reported separately.
std::uint64_t config_hash(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace photonstat::cli
