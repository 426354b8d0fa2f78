#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace phaseret {

enum class LogLevel { off = 0, info = 1, debug = 2 };

// Diagnostic verbosity comes from the PHASERET_LOG environment variable
// (off|info|debug, default off). All diagnostics go to standard error;
// standard output stays reserved for command results.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PHASERET_LOG");
    if (env == nullptr) return LogLevel::off;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    return LogLevel::off;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info)
    std::fprintf(stderr, "phaseret: %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug)
    std::fprintf(stderr, "phaseret: %s\n", msg.c_str());
}

}  // namespace phaseret
