#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqprune/store.hpp"
#include "seqprune/tokenizer.hpp"

namespace seqprune {

enum class CorpusFormat { Jsonl, PlainText };

/// JSON Lines with {"id","text"} per line, or plain text where blank lines
/// separate documents. Enforces unique ids and non-blank text.
std::vector<Document> read_corpus(const std::string& path, CorpusFormat format);
std::vector<Document> parse_jsonl_corpus(const std::string& content, const std::string& source_label);
std::vector<Document> parse_plain_text_corpus(const std::string& content);

struct PackResult {
  SequenceStore store;
  std::uint64_t total_tokens = 0;    // encoded tokens plus one eod per document
  std::uint64_t dropped_tokens = 0;  // trailing remainder shorter than t
};

/// Encode every document, append eod, concatenate, and cut into sequences
/// of exactly t tokens. The trailing remainder is dropped, never padded.
PackResult tokenize_and_pack(const std::vector<Document>& docs, const Tokenizer& tokenizer,
                             std::uint32_t t);

}  // namespace seqprune
