#include "ictus/error.hpp"

#include <iostream>
#include <mutex>

namespace ictus {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_frame: return "invalid_frame";
    case Errc::config: return "config";
    case Errc::unsupported_rate: return "unsupported_rate";
    case Errc::undefined_phase: return "undefined_phase";
    case Errc::invalid_annotation: return "invalid_annotation";
    case Errc::shape: return "shape";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::io: return "io";
    case Errc::format: return "format";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::truncated: return "truncated";
    case Errc::invariant: return "invariant";
    case Errc::diverged: return "diverged";
    case Errc::undefined_metric: return "undefined_metric";
    case Errc::protocol: return "protocol";
  }
  return "unknown";
}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "ictus: warning: " << msg << '\n'; };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  auto previous = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) handler_slot()(message);
}

}  // namespace ictus
