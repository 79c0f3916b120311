#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ictus {

enum class Errc {
  invalid_frame,
  config,
  unsupported_rate,
  undefined_phase,
  invalid_annotation,
  shape,
  length_mismatch,
  io,
  format,
  version_mismatch,
  truncated,
  invariant,
  diverged,
  undefined_metric,
  protocol,
};

std::string_view to_string(Errc code);

/// Every recoverable failure in the library is reported as an Error carrying
/// one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Non-fatal diagnostics (regularized solves, clamped speeds) go through a
// process-wide sink. The default writes to stderr.
using WarningHandler = std::function<void(std::string_view)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace ictus
