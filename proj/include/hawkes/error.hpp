#pragma once

#include <stdexcept>
#include <string>

namespace hawkes {

// Machine-readable error families. The CLI maps them onto exit codes.
enum class ErrorCode {
  Domain,       // argument outside the operation's domain
  Regime,       // operation undefined in the process's regime
  Numerical,    // iteration failed to converge or left its bracket
  OutOfSupport, // tabulated kernel evaluated beyond its grid without a tail
  Config,       // malformed configuration or CLI usage
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Regime: return "regime";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::OutOfSupport: return "out_of_support";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ErrorCode::Domain, m) {}
};
struct RegimeError : Error {
  explicit RegimeError(const std::string& m) : Error(ErrorCode::Regime, m) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error(ErrorCode::Numerical, m) {}
};
struct OutOfSupportError : Error {
  explicit OutOfSupportError(const std::string& m) : Error(ErrorCode::OutOfSupport, m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCode::Config, m) {}
};

}  // namespace hawkes
