// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tadapt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;   // unparseable input, invalid config, mixed configs
inline constexpr int kExitPrecondition = 3;   // e.g. no evaluable train time

inline constexpr const char* kVersion = "tadapt 0.1.0";

/// Runs one invocation. `args` excludes the program name. Documents go to
/// `out` unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tadapt::cli
