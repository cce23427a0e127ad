#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noiseflow {

enum class ErrorCode {
  kSingularSystem,
  kNonSymmetricInput,
  kNoConvergence,
  kUnstableEffectiveDrift,
  kInvalidParams,
  kUnstable,
  kUnsupportedParams,
  kInvalidInput,
  kDegenerateCavity,
  kNoCoupling,
  kZeroRateChannel,
  kOutsideAdmissibleRegion,
  kSchemaError,
  kNegativeOccupation,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the sweep runner in particular) can map it to a row status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by counting-field continuation; remembers how far it got.
class OutsideAdmissibleRegion : public Error {
 public:
  OutsideAdmissibleRegion(double requested_s, double last_admissible_s,
                          const std::string& reason);

  double requested_s() const noexcept { return requested_s_; }
  double last_admissible_s() const noexcept { return last_admissible_s_; }

 private:
  double requested_s_;
  double last_admissible_s_;
};

}  // namespace noiseflow
