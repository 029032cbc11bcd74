#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace keratix::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold from KERATIX_LOG (error|warn|info|debug), default warn.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("KERATIX_LOG");
    if (env == nullptr) return Level::warn;
    const std::string_view v(env);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
  }();
  return level;
}

inline void write(Level level, std::string_view msg) {
  if (level > threshold()) return;
  static constexpr const char* kTags[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[keratix %s] %.*s\n", kTags[static_cast<int>(level)], static_cast<int>(msg.size()),
               msg.data());
}

inline void error(std::string_view msg) { write(Level::error, msg); }
inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

}  // namespace keratix::log
