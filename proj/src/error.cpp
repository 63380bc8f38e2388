#include "histostack/error.hpp"

namespace histostack {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kUnsupportedLayout: return "UnsupportedLayout";
    case ErrorCode::kBundleInvalid: return "BundleInvalid";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kBadRatios: return "BadRatios";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kBadInput: return "BadInput";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kBadKernelParams: return "BadKernelParams";
    case ErrorCode::kBadLabel: return "BadLabel";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kProvenanceError: return "ProvenanceError";
    case ErrorCode::kGridExhausted: return "GridExhausted";
    case ErrorCode::kNothingToCurate: return "NothingToCurate";
    case ErrorCode::kBadConfig: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace histostack
