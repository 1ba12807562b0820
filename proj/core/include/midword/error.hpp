#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace midword {

enum class Errc {
  kInvalidInput,
  kDimensionMismatch,
  kNotPositiveDefinite,
  kCutLocus,
  kDegenerateInput,
  kInsufficientFeatures,
  kRankDeficient,
  kTooFewSamples,
  kKindMismatch,
  kConfig,
  kFormat,
  kIo,
};

std::string_view errc_name(Errc code);

// Broad failure class, used for CLI exit codes.
enum class ErrorClass { kConfig, kData, kNumerical };

ErrorClass classify(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  Error(Verbatim, Errc code, const std::string& what);

 private:
  Errc code_;
};

/// Error raised inside a pipeline stage; carries the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace midword
