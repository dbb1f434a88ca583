#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "hq/config.hpp"

// Batch entry point shared by the hqsolve executable and the tests.

namespace hq::cli {

/// Process exit codes.
enum ExitCode : int {
  ok = 0,
  config_error = 1,
  nonconvergence = 2,
  check_failed = 3,  ///< the run finished but an asserted estimate failed
};

struct Options {
  std::string config_path;
  std::optional<std::string> output_dir;  ///< overrides run.output_dir
  bool timestamp = true;                  ///< "# generated ..." first line in CSV outputs
  int threads = 0;                        ///< 0 keeps the current setting
};

/// Loads the config, runs its command, writes outputs and prints one summary
/// line per report to out. Errors go to err; the return value is an ExitCode.
int run(const Options& options, std::ostream& out, std::ostream& err);

/// Same, with a config already in memory.
int run(const RunConfig& config, const Options& options, std::ostream& out, std::ostream& err);

}  // namespace hq::cli
