#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace qeleak::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

inline std::atomic<Level>& threshold() {
  static std::atomic<Level> level{Level::kWarn};
  return level;
}

inline void write(Level level, std::string_view msg) {
  if (level < threshold().load()) return;
  static std::mutex mu;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  std::lock_guard lock(mu);
  std::cerr << "qeleak [" << kNames[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void debug(std::string_view m) { write(Level::kDebug, m); }
inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void warn(std::string_view m) { write(Level::kWarn, m); }

}  // namespace qeleak::log
