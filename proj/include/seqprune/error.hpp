#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace seqprune {

enum class ErrorKind {
  // configuration / parameter errors (CLI exit code 2)
  InvalidArgument,
  VocabTooSmall,
  SequenceTooShort,
  EmptyKeep,
  // data errors (CLI exit code 3)
  IoError,
  EmptyCorpus,
  InvalidDocument,
  DuplicateDocId,
  TokenIdOverflow,
  CorruptStore,
  EmptyStore,
  ParseError,
  DuplicateSeqId,
  UnknownSeqId,
  MixedMetrics,
  LengthMismatch,
  StoreMismatch,
  EmptyTable,
  MetricMismatch,
  IdOutOfRange,
};

const char* error_kind_name(ErrorKind kind);

/// True for errors caused by bad parameters rather than bad input data.
bool is_config_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  Error(ErrorKind kind, const std::string& message, std::uint64_t seq_id)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message +
                           " (seq_id=" + std::to_string(seq_id) + ")"),
        kind_(kind),
        message_(message),
        seq_id_(seq_id) {}

  ErrorKind kind() const { return kind_; }
  /// Undecorated message, without the kind prefix or seq_id suffix.
  const std::string& message() const { return message_; }
  std::optional<std::uint64_t> seq_id() const { return seq_id_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::optional<std::uint64_t> seq_id_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace seqprune
