#include "sentinel/error.hpp"

namespace sentinel {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::MissingFixture: return "MissingFixture";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptIndexFile: return "CorruptIndexFile";
    case ErrorCode::EmptyMeme: return "EmptyMeme";
    case ErrorCode::MissingTranscript: return "MissingTranscript";
    case ErrorCode::MissingExplanations: return "MissingExplanations";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::EmptyRows: return "EmptyRows";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::MissingGoldLabels: return "MissingGoldLabels";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace sentinel
