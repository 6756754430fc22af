#include "xfel/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "xfel/error.hpp"

namespace xfel::log {
namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;
}  // namespace

void set_level(Level lvl) { g_level = lvl; }
Level level() { return g_level; }

Level parse_level(const std::string& name) {
  if (name == "debug") return Level::debug;
  if (name == "info") return Level::info;
  if (name == "warn" || name == "warning") return Level::warn;
  if (name == "error") return Level::error;
  if (name == "off") return Level::off;
  fail(ErrorKind::config, "unknown log level '" + name + "'");
}

void write(Level lvl, const std::string& message) {
  static constexpr const char* tags[] = {"[D] ", "[I] ", "[W] ", "[E] "};
  std::lock_guard lock(g_mutex);
  std::cerr << tags[static_cast<int>(lvl)] << message << '\n';
}

}  // namespace xfel::log

namespace xfel {
const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::numerical_breakdown: return "numerical-breakdown";
    case ErrorKind::comparison: return "comparison";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::diverging_flow: return "diverging-flow";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}
}  // namespace xfel
