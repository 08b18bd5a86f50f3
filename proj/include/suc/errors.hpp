#pragma once

#include <stdexcept>
#include <string>

namespace suc {

// Error taxonomy shared by every module. Codes map onto CLI exit codes:
// data/format errors exit 3, network errors exit 4 (see tools/suc_main.cpp).
enum class Errc {
  invalid_sbox,
  not_bijective,
  wrong_length,
  cache_write_failure,
  filter_exhausted,
  index_out_of_range,
  invalid_spec,
  payload_too_large,
  already_locked,
  malformed_directory,
  not_personalized,
  default_template_not_personalized,
  duplicate_challenge_retry_exceeded,
  unknown_serial,
  channel_failure,
  timeout,
  bind_failure,
  protocol_violation,
  parse_error,
  duplicate_index,
  io_failure,
};

class SucError : public std::runtime_error {
 public:
  SucError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw SucError(code, what);
}

}  // namespace suc
