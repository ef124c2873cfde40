#pragma once

#include <ostream>

namespace otrelax::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr const char* kVersion = "0.1.0";

// Runs one invocation. Results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace otrelax::cli
