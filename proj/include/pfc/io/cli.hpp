/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace pfc::io {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitFault = 2,
};

/// Entry point of `pfcsim`. Subcommands: run, opregion, mab-solve, loss,
/// compare, sweep. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// --out if given, else $PFCSIM_OUT, else "out".
std::filesystem::path default_output_dir(const std::string& flag);

} // namespace pfc::io
