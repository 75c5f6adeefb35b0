#pragma once

// Command entry points shared by the C API and the CLI.  Each command reads
// a JSON config, applies flag overrides, runs, writes its reports, and
// returns a process exit code.  Failures never throw across this boundary;
// the message behind a nonzero code is retrievable via last_error().

#include <cstdint>
#include <string>

namespace longmed {

enum ExitCode {
  kExitOk = 0,
  kExitValidation = 2,  // bad config, bad data, bad flags
  kExitNoConverge = 3,  // fit exhausted its restarts (report still written)
  kExitPartialMc = 4,   // a condition hit the attempt cap short of `reps`
  kExitIo = 5,          // unreadable input or unwritable output
  kExitInternal = 6,
};

struct CmdOverrides {
  bool has_model = false;
  int model = 1;
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_out = false;
  std::string out;
  bool univariate = false;  // fit only
  bool has_reps = false;    // mc only
  int reps = 0;
};

int cmd_fit(const std::string& config_path, const CmdOverrides& ov);
int cmd_simulate(const std::string& config_path, const CmdOverrides& ov);
int cmd_mc(const std::string& config_path, const CmdOverrides& ov);

// Message for the most recent nonzero return on this thread.
const std::string& last_error();
void set_last_error(const std::string& msg);

}  // namespace longmed
