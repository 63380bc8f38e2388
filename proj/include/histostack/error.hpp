#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace histostack {

enum class ErrorCode {
  kIoError,
  kFormatError,
  kUnsupportedDtype,
  kUnsupportedLayout,
  kBundleInvalid,
  kEmptyClass,
  kDecodeError,
  kClassTooSmall,
  kBadRatios,
  kDegenerateLabels,
  kBadInput,
  kShapeError,
  kBadKernelParams,
  kBadLabel,
  kAlignmentError,
  kProvenanceError,
  kGridExhausted,
  kNothingToCurate,
  kBadConfig,
};

std::string_view error_code_name(ErrorCode code);

// Every domain failure in the library is raised as this type; the code is the
// stable, machine-checkable part and the message carries context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace histostack
