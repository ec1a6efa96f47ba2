#pragma once

#include <ostream>

namespace treecon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;       // parse and I/O failures
inline constexpr int kExitDomain = 2;      // domain, schema, config and usage failures
inline constexpr int kExitDivergence = 3;  // training left the safe numeric range

/// Runs one `treecon` invocation. Results go to `out` as JSON lines; failures go to
/// `err` as one JSON object {"error": kind, "message": text}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace treecon::cli
