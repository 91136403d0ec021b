#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stickel/groupring.hpp"

namespace stickel::cli {

inline constexpr const char* kTool = "stickel";
inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSchema = "stickel-report/1";

enum ExitCode : int { kOk = 0, kFailed = 1, kInvalid = 2, kExhausted = 3 };

/// Entry point of the `stickel` executable.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RecheckOutcome {
  bool ok = false;
  bool skipped = false;
  std::string reason;
};
/// Re-derives the verdict of one report envelope from its witness data.
RecheckOutcome recheck_envelope(const Json& envelope);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

}  // namespace stickel::cli
