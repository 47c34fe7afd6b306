#pragma once

#include <stdexcept>
#include <string>

namespace icad {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  uninitialized,
  stale_cache,
  divergence,
  bad_magic,
  version_mismatch,
  truncated,
  trailing_data,
  unsorted_scores,
  fingerprint_mismatch,
  invalid_model,
  io_error,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::non_finite: return "non_finite";
    case Errc::uninitialized: return "uninitialized";
    case Errc::stale_cache: return "stale_cache";
    case Errc::divergence: return "divergence";
    case Errc::bad_magic: return "bad_magic";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::truncated: return "truncated";
    case Errc::trailing_data: return "trailing_data";
    case Errc::unsorted_scores: return "unsorted_scores";
    case Errc::fingerprint_mismatch: return "fingerprint_mismatch";
    case Errc::invalid_model: return "invalid_model";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace icad
