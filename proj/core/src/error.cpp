#include "midword/error.hpp"

namespace midword {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidInput: return "invalid-input";
    case Errc::kDimensionMismatch: return "dimension-mismatch";
    case Errc::kNotPositiveDefinite: return "not-positive-definite";
    case Errc::kCutLocus: return "cut-locus";
    case Errc::kDegenerateInput: return "degenerate-input";
    case Errc::kInsufficientFeatures: return "insufficient-features";
    case Errc::kRankDeficient: return "rank-deficient";
    case Errc::kTooFewSamples: return "too-few-samples";
    case Errc::kKindMismatch: return "kind-mismatch";
    case Errc::kConfig: return "config";
    case Errc::kFormat: return "format";
    case Errc::kIo: return "io";
  }
  return "unknown";
}

ErrorClass classify(Errc code) {
  switch (code) {
    case Errc::kConfig:
      return ErrorClass::kConfig;
    case Errc::kNotPositiveDefinite:
    case Errc::kCutLocus:
    case Errc::kDegenerateInput:
    case Errc::kRankDeficient:
      return ErrorClass::kNumerical;
    default:
      return ErrorClass::kData;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what),
      code_(code) {}

Error::Error(Verbatim, Errc code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

StageError::StageError(std::string stage, const Error& inner)
    : Error(Verbatim{}, inner.code(), "[" + stage + "] " + inner.what()),
      stage_(std::move(stage)) {}

}  // namespace midword
