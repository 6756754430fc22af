#pragma once

#include <sstream>
#include <string>

namespace xfel::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

void set_level(Level level);
Level level();
Level parse_level(const std::string& name);
void write(Level level, const std::string& message);

template <class... Args>
void message(Level lvl, const Args&... args) {
  if (lvl < level()) return;
  std::ostringstream os;
  (os << ... << args);
  write(lvl, os.str());
}

template <class... Args>
void info(const Args&... args) { message(Level::info, args...); }
template <class... Args>
void warn(const Args&... args) { message(Level::warn, args...); }
template <class... Args>
void debug(const Args&... args) { message(Level::debug, args...); }

}  // namespace xfel::log
