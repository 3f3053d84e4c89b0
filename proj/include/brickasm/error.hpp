#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brickasm {

enum class Errc {
  kBehindCamera,
  kInsufficientViews,
  kDegenerateGeometry,
  kNoVisibleViews,
  kNoFeasiblePose,
  kGenerationExhausted,
  kEmptyDataset,
  kEmptyInput,
  kNonFiniteLoss,
  kCyclicGraph,
  kMissingAssignment,
  kSchema,
  kInvalidArgument,
};

std::string_view to_string(Errc code);

// All recoverable failures in the library are reported as brickasm::Error.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kBehindCamera: return "BehindCamera";
    case Errc::kInsufficientViews: return "InsufficientViews";
    case Errc::kDegenerateGeometry: return "DegenerateGeometry";
    case Errc::kNoVisibleViews: return "NoVisibleViews";
    case Errc::kNoFeasiblePose: return "NoFeasiblePose";
    case Errc::kGenerationExhausted: return "GenerationExhausted";
    case Errc::kEmptyDataset: return "EmptyDataset";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kCyclicGraph: return "CyclicGraph";
    case Errc::kMissingAssignment: return "MissingAssignment";
    case Errc::kSchema: return "SchemaViolation";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace brickasm
