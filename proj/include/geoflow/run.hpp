#pragma once

#include "geoflow/config.hpp"
#include "geoflow/error.hpp"

namespace geoflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIncompleteWindow = 4;

int exit_code(ErrorCode code);

/// Runs one subcommand: gen, spectrum, entropy, stretch, thermo-selftest,
/// germ or report. Errors are printed to stderr with their stage; outputs
/// written by a failed run are removed.
int run(const RunConfig& cfg);

}  // namespace geoflow
