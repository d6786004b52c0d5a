#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "photonstat/config.hpp"

namespace photonstat::cli {

/// Exit statuses of run_pipeline.
enum ExitCode : int { Ok = 0, ValidationFailure = 1, RuntimeFailure = 2 };

/// Subcommand options. Fields a subcommand does not use are ignored; negative
/// numbers mean "take it from the config".
struct Options {
  std::string config_path;           ///< empty: built-in defaults
  std::optional<std::uint64_t> seed;  ///< overrides run.seed
  std::string out;                   ///< output file (directory for demo)
  std::string in;                    ///< primary input file
  std::string g2_params;             ///< fit report holding g2 parameters

  std::string model = "classical";  ///< simulate: classical | quantum; fit: g2 | eq5 | eq8 | both
  std::vector<int> channels{0};     ///< merged into one stream where one is needed
  std::vector<int> roles;           ///< g3map: three channels for t1, t2, t3
  int channel_b = 1;                ///< xg2 second stream

  double duration = -1.0;
  double delta = -1.0;
  double delta_bin = -1.0;
  double delta_lo = 0.0;
  int n_delta = 1;
  double tau_bin = -1.0;
  double tau_max = -1.0;
  double delta_max = -1.0;  ///< fit: upper end of the delay scan

  int harmonics = 2;
  double window_lo = 0.0, window_hi = -1.0;

  std::vector<double> pump;          ///< sweep-pump: normalized currents
  std::string mapping = "coupling";  ///< sweep-pump: coupling | drive
  double j0 = 0.0;
  bool fit_j0 = false;
};

/// Resolved configuration: the file (or defaults) with the seed override.
RunConfig load_config(const Options& o);

/// Runs one subcommand. Library errors are reported on `err` (or `log` when
/// null) with their module prefix; validation and parse failures give 1,
/// anything else 2.
int run_pipeline(const std::string& command, const Options& o, std::ostream& log, std::ostream* err = nullptr);

const std::vector<std::string>& command_names();

}  // namespace photonstat::cli
