// artic2ac/common/log.h

// Copyright 2026  artic2ac authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef ARTIC2AC_COMMON_LOG_H_
#define ARTIC2AC_COMMON_LOG_H_

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace artic2ac {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Verbosity is controlled by the ARTIC2AC_LOG environment variable
// (error|info|debug). Default is info. All messages go to stderr so that
// stdout stays clean for machine-readable output.
inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("ARTIC2AC_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

template <typename... Args>
void log_error(const char* fmt, Args... args) {
  std::fprintf(stderr, "[error] ");
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
  if (log_level() < LogLevel::kInfo) return;
  std::fprintf(stderr, "[info] ");
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
  if (log_level() < LogLevel::kDebug) return;
  std::fprintf(stderr, "[debug] ");
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

}  // namespace artic2ac

#endif  // ARTIC2AC_COMMON_LOG_H_
