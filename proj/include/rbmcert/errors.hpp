#pragma once

#include <stdexcept>
#include <string>

namespace rbmcert {

// Process exit codes used by the command line front end. Stable contract.
enum class ExitCode : int {
  kOk = 0,
  kInput = 2,
  kCapability = 3,
  kVerification = 4,
  kNumerical = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed or inconsistent user input.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ExitCode::kInput, what) {}
};

// A request beyond a documented size limit (e.g. exhaustive subset
// enumeration above 20 dimensions).
class CapabilityError : public Error {
 public:
  CapabilityError(const std::string& what, int limit)
      : Error(ExitCode::kCapability, what), limit_(limit) {}

  int limit() const noexcept { return limit_; }

 private:
  int limit_;
};

// A stability condition or certificate check did not hold.
class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what)
      : Error(ExitCode::kVerification, what) {}
};

// Point outside the region where a function is defined, e.g. x'Qx <= 0.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ExitCode::kVerification, what) {}
};

// Iterative solver failed to converge.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ExitCode::kNumerical, what) {}
};

}  // namespace rbmcert
