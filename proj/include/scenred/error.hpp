#pragma once

#include <stdexcept>
#include <string>

namespace scenred {

enum class ErrorCode {
  kParse,
  kDimension,
  kNegativity,
  kValidation,
  kSizeGuard,
  kSolver,
  kTimeLimit,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception type. The code is
// what the CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scenred
