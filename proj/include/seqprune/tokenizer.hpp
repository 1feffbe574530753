#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqprune {

struct Document {
  std::string doc_id;
  std::string text;
};

/// Byte-level BPE tokenizer. Ids 0..255 are the raw bytes, id 256 is the
/// end-of-document marker, merged tokens start at 257. Because the base
/// alphabet covers every byte there is no unknown-token path and
/// decode(encode(s)) == s for any byte string.
class Tokenizer {
 public:
  static constexpr std::uint32_t kNumByteTokens = 256;
  static constexpr std::uint32_t kEodId = 256;
  static constexpr std::uint32_t kMinVocabSize = 258;  // bytes + eod + one merge slot

  /// Learn merges from the documents until vocab_size entries exist or no
  /// pair occurs at least twice. Equal-frequency ties go to the
  /// lexicographically smaller (left bytes, right bytes) pair.
  static Tokenizer train(const std::vector<Document>& docs, std::uint32_t vocab_size);

  std::vector<std::uint32_t> encode(std::string_view text) const;
  std::string decode(std::span<const std::uint32_t> ids) const;

  /// Configured vocabulary size (the id space used by stores and models).
  std::uint32_t vocab_size() const { return vocab_size_; }
  /// Ids actually assigned: 257 + learned merges. At most vocab_size().
  std::uint32_t num_assigned_ids() const {
    return kNumByteTokens + 1 + static_cast<std::uint32_t>(merges_.size());
  }
  std::uint32_t eod_id() const { return kEodId; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& merges() const { return merges_; }
  const std::string& token_bytes(std::uint32_t id) const;

  void save(const std::string& path) const;
  static Tokenizer load(const std::string& path);

 private:
  Tokenizer() = default;
  void rebuild_token_bytes();

  std::uint32_t vocab_size_ = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> merges_;  // in rank order
  std::vector<std::string> token_bytes_;  // id -> raw bytes ("" for eod)
};

}  // namespace seqprune
