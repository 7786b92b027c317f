#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace rfc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct CommandOptions {
  std::string config;
  std::string out;                    // empty: no files written
  std::optional<std::string> gains;   // "lo:hi:n"
  std::optional<std::uint64_t> seed;
};

/// Runs one workbench subcommand (freqresp, bodeintegral, rootlocus,
/// simulate, sweep). Reports go to `out`, diagnostics to `err`; the return
/// value is the process exit code.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Path of the gnuplot script written next to a CSV: same stem, ".gp".
std::string script_path_for(const std::string& csv_path);

}  // namespace rfc::cli
