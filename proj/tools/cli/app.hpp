#pragma once

namespace kmodels::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;    ///< usage, IO or parse error
inline constexpr int kExitFailure = 2;  ///< the computation itself failed (e.g. every cluster vanished)

/// Entry point of the `kmodels` command. Returns the process exit status.
int cli_main(int argc, const char* const* argv);

}  // namespace kmodels::cli
