#pragma once

/**
 * Minimal leveled logging to stderr, controlled by the RATEPMP_LOG
 * environment variable: quiet | info (default) | debug.
 *
 * Logging never touches stdout or output files, so enabling it cannot
 * perturb reproducibility of results.
 */

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ratepmp::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

inline Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("RATEPMP_LOG");
    if (env == nullptr) return Level::Info;
    if (std::strcmp(env, "quiet") == 0) return Level::Quiet;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Info;
  }();
  return lvl;
}

inline void vprint(const char* tag, const char* fmt, std::va_list args) {
  std::fprintf(stderr, "[ratepmp %s] ", tag);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

inline void info(const char* fmt, ...) {
  if (level() < Level::Info) return;
  std::va_list args;
  va_start(args, fmt);
  vprint("info", fmt, args);
  va_end(args);
}

inline void debug(const char* fmt, ...) {
  if (level() < Level::Debug) return;
  std::va_list args;
  va_start(args, fmt);
  vprint("debug", fmt, args);
  va_end(args);
}

}  // namespace ratepmp::log
