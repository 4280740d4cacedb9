#include "pips/errors.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace pips {

namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_log_mutex;
}  // namespace

void log_warning(const std::string& message) {
  if (g_quiet.load()) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet.store(quiet); }

}  // namespace pips
