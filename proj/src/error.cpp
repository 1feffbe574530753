#include "seqprune/error.hpp"

namespace seqprune {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::VocabTooSmall: return "VocabTooSmall";
    case ErrorKind::SequenceTooShort: return "SequenceTooShort";
    case ErrorKind::EmptyKeep: return "EmptyKeep";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InvalidDocument: return "InvalidDocument";
    case ErrorKind::DuplicateDocId: return "DuplicateDocId";
    case ErrorKind::TokenIdOverflow: return "TokenIdOverflow";
    case ErrorKind::CorruptStore: return "CorruptStore";
    case ErrorKind::EmptyStore: return "EmptyStore";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateSeqId: return "DuplicateSeqId";
    case ErrorKind::UnknownSeqId: return "UnknownSeqId";
    case ErrorKind::MixedMetrics: return "MixedMetrics";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::StoreMismatch: return "StoreMismatch";
    case ErrorKind::EmptyTable: return "EmptyTable";
    case ErrorKind::MetricMismatch: return "MetricMismatch";
    case ErrorKind::IdOutOfRange: return "IdOutOfRange";
  }
  return "Error";
}

bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::VocabTooSmall:
    case ErrorKind::SequenceTooShort:
    case ErrorKind::EmptyKeep:
      return true;
    default:
      return false;
  }
}

}  // namespace seqprune
