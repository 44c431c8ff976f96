#pragma once

#include <stdexcept>
#include <string>

namespace fz {

enum class errc {
  shape_mismatch,
  range_violation,
  non_finite,
  empty_input,
  unknown_symbol,
  truncated_stream,
  prior_mismatch,
  bad_magic,
  version_mismatch,
  prior_hash_mismatch,
  channel_closed,
  checksum_failure,
  degenerate_geometry,
  no_valid_sample,
  degenerate_box,
  parse_error,
  io_error,
};

const char* errc_name(errc code);

/// Thrown by every operation in this library. `code()` identifies the
/// failure class; `what()` carries context.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

// Protocol-level failures map to CLI exit code 3, everything else to 2.
inline bool is_protocol_error(errc code) {
  switch (code) {
    case errc::bad_magic:
    case errc::version_mismatch:
    case errc::prior_hash_mismatch:
    case errc::channel_closed:
    case errc::checksum_failure:
    case errc::truncated_stream:
    case errc::prior_mismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace fz
