#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace genlik {

// Parsed command line + config file. Flags override config entries;
// unknown keys are rejected up front, numeric parameters are checked
// against the target operation's preconditions before dispatch.
struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  double beta = 0.95;
  std::string format = "csv";  // csv | jsonl
  std::string out;             // empty: stdout
  int threads = 0;             // 0: hardware default / GENLIK_THREADS
};

// argv without the program name; throws UsageError on any problem.
RunConfig parse_config(const std::vector<std::string>& argv);

// Runs the subcommand; returns 0 on success, 1 on solver failure (a
// diagnostic record is emitted first). UsageError propagates.
int dispatch(const RunConfig& config);

// Full front end: parse + dispatch + exit-status mapping (2 on usage
// errors, 1 on solver failures).
int genlik_main(int argc, const char* const* argv);

}  // namespace genlik
