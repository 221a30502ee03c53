#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

// Every failure the pipeline can surface, named so the CLI and service can
// report the originating condition without string matching.
enum class ErrorCode {
  // dataset
  MalformedLine,
  InvalidLabel,
  // backends
  BackendUnavailable,
  ProtocolError,
  KindMismatch,
  MissingFixture,
  ConfigParseError,
  ConfigInvalid,
  // knowledge store
  DimensionMismatch,
  ZeroVector,
  DuplicateId,
  EmptyIndex,
  IoError,
  CorruptIndexFile,
  // vqa
  EmptyMeme,
  // detector
  MissingTranscript,
  MissingExplanations,
  UnparseableVerdict,
  // eval
  EmptyRows,
  SingleClass,
  MissingGoldLabels,
  // generic precondition violation
  InvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sentinel
