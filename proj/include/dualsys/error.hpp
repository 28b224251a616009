#pragma once

#include <stdexcept>
#include <string>

namespace dualsys {

/// Failure categories shared by every module. The C API maps these 1:1 onto
/// its status codes, so new entries must be appended there as well.
enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  schema,
  infeasible,
  transport,
  auth,
  rate_limit,
  unscripted,
  exhausted,
  empty_selection,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dualsys
