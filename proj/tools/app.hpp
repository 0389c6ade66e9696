#pragma once

#include <iosfwd>

namespace rlad::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Runs one command line. Returns 0 on success, 2 on usage errors and the
/// category exit code for library errors; messages go to `err` as
/// "error[<category>]: <message>".
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rlad::cli
