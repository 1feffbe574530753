#include "seqprune/tokenizer.hpp"

#include <unordered_map>

#include <json.hpp>
#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

namespace {

// Replace every left-to-right occurrence of (left, right) in place.
void apply_merge(std::vector<std::uint32_t>& ids, std::uint32_t left, std::uint32_t right,
                 std::uint32_t merged) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < ids.size();) {
    if (i + 1 < ids.size() && ids[i] == left && ids[i + 1] == right) {
      ids[w++] = merged;
      i += 2;
    } else {
      ids[w++] = ids[i++];
    }
  }
  ids.resize(w);
}

std::vector<std::uint32_t> bytes_to_ids(std::string_view text) {
  std::vector<std::uint32_t> ids;
  ids.reserve(text.size());
  for (unsigned char c : text) ids.push_back(c);
  return ids;
}

// Bytes rendered as codepoints U+0000..U+00FF so the vocab survives JSON.
std::string latin1_to_utf8(const std::string& bytes) {
  std::string out;
  for (unsigned char c : bytes) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

}  // namespace

Tokenizer Tokenizer::train(const std::vector<Document>& docs, std::uint32_t vocab_size) {
  if (vocab_size < kMinVocabSize) {
    raise(ErrorKind::VocabTooSmall, "vocab_size " + std::to_string(vocab_size) +
                                        " below minimum " + std::to_string(kMinVocabSize));
  }
  if (docs.empty()) raise(ErrorKind::EmptyCorpus, "no documents to train on");

  Tokenizer tok;
  tok.vocab_size_ = vocab_size;
  tok.rebuild_token_bytes();

  std::vector<std::vector<std::uint32_t>> pieces;
  pieces.reserve(docs.size());
  for (const auto& doc : docs) pieces.push_back(bytes_to_ids(doc.text));

  while (tok.num_assigned_ids() < vocab_size) {
    std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
    for (const auto& ids : pieces) {
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        pair_counts[(static_cast<std::uint64_t>(ids[i]) << 32) | ids[i + 1]] += 1;
      }
    }

    // Best pair: highest count, ties to the lexicographically smaller
    // (left bytes, right bytes). Selection scans the whole map, so hash
    // iteration order never affects the result.
    bool found = false;
    std::uint64_t best_count = 0;
    std::uint32_t best_left = 0, best_right = 0;
    for (const auto& [key, count] : pair_counts) {
      if (count < 2) continue;
      auto left = static_cast<std::uint32_t>(key >> 32);
      auto right = static_cast<std::uint32_t>(key & 0xffffffffULL);
      if (!found || count > best_count) {
        found = true;
        best_count = count;
        best_left = left;
        best_right = right;
        continue;
      }
      if (count == best_count) {
        const auto& bl = tok.token_bytes_[best_left];
        const auto& br = tok.token_bytes_[best_right];
        const auto& cl = tok.token_bytes_[left];
        const auto& cr = tok.token_bytes_[right];
        if (cl < bl || (cl == bl && cr < br)) {
          best_left = left;
          best_right = right;
        }
      }
    }
    if (!found) break;

    std::uint32_t merged = tok.num_assigned_ids();
    tok.merges_.emplace_back(best_left, best_right);
    tok.token_bytes_.push_back(tok.token_bytes_[best_left] + tok.token_bytes_[best_right]);
    for (auto& ids : pieces) apply_merge(ids, best_left, best_right, merged);
  }
  return tok;
}

std::vector<std::uint32_t> Tokenizer::encode(std::string_view text) const {
  std::vector<std::uint32_t> ids = bytes_to_ids(text);
  for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
    apply_merge(ids, merges_[rank].first, merges_[rank].second,
                kNumByteTokens + 1 + static_cast<std::uint32_t>(rank));
  }
  return ids;
}

std::string Tokenizer::decode(std::span<const std::uint32_t> ids) const {
  std::string out;
  for (std::uint32_t id : ids) out += token_bytes(id);
  return out;
}

const std::string& Tokenizer::token_bytes(std::uint32_t id) const {
  if (id >= token_bytes_.size()) {
    raise(ErrorKind::InvalidArgument, "token id " + std::to_string(id) + " has no vocab entry");
  }
  return token_bytes_[id];
}

void Tokenizer::rebuild_token_bytes() {
  token_bytes_.clear();
  token_bytes_.reserve(kNumByteTokens + 1 + merges_.size());
  for (std::uint32_t b = 0; b < kNumByteTokens; ++b) {
    token_bytes_.push_back(std::string(1, static_cast<char>(b)));
  }
  token_bytes_.emplace_back();  // eod carries no bytes
  for (const auto& [left, right] : merges_) {
    if (left >= token_bytes_.size() || right >= token_bytes_.size()) {
      raise(ErrorKind::ParseError, "merge references token id not yet defined");
    }
    token_bytes_.push_back(token_bytes_[left] + token_bytes_[right]);
  }
}

void Tokenizer::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "seqprune-tokenizer";
  j["version"] = 1;
  j["vocab_size"] = vocab_size_;
  j["eod_id"] = kEodId;
  auto& merges = j["merges"] = nlohmann::json::array();
  for (const auto& [left, right] : merges_) merges.push_back({left, right});
  auto& vocab = j["vocab"] = nlohmann::json::array();
  for (std::uint32_t id = 0; id < num_assigned_ids(); ++id) {
    vocab.push_back(id == kEodId ? std::string("<eod>") : latin1_to_utf8(token_bytes_[id]));
  }
  write_text_file(path, j.dump(2) + "\n");
}

Tokenizer Tokenizer::load(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::ParseError, "tokenizer file '" + path + "': " + e.what());
  }
  try {
    if (j.at("format") != "seqprune-tokenizer" || j.at("version") != 1) {
      raise(ErrorKind::ParseError, "tokenizer file '" + path + "': unrecognized format");
    }
    Tokenizer tok;
    tok.vocab_size_ = j.at("vocab_size").get<std::uint32_t>();
    if (tok.vocab_size_ < kMinVocabSize) {
      raise(ErrorKind::ParseError, "tokenizer file '" + path + "': vocab_size below minimum");
    }
    if (j.at("eod_id").get<std::uint32_t>() != kEodId) {
      raise(ErrorKind::ParseError, "tokenizer file '" + path + "': unexpected eod_id");
    }
    for (const auto& m : j.at("merges")) {
      tok.merges_.emplace_back(m.at(0).get<std::uint32_t>(), m.at(1).get<std::uint32_t>());
    }
    if (tok.num_assigned_ids() > tok.vocab_size_) {
      raise(ErrorKind::ParseError, "tokenizer file '" + path + "': more merges than vocab_size allows");
    }
    tok.rebuild_token_bytes();
    return tok;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::ParseError, "tokenizer file '" + path + "': " + e.what());
  }
}

}  // namespace seqprune
