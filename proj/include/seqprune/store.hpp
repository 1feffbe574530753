#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqprune {

/// Fixed-length token sequences packed back to back. The file form is
/// little-endian: magic "SQST", u32 version=1, u32 t, u32 vocab_size,
/// u64 n, then n*t token ids as u32.
struct SequenceStore {
  std::uint32_t t = 0;
  std::uint32_t vocab_size = 0;
  std::vector<std::uint32_t> tokens;  // n * t ids, sequence-major

  std::uint64_t num_sequences() const { return t == 0 ? 0 : tokens.size() / t; }

  std::span<const std::uint32_t> sequence(std::uint64_t seq_id) const {
    return std::span<const std::uint32_t>(tokens).subspan(seq_id * t, t);
  }
};

std::string serialize_store(const SequenceStore& store);
SequenceStore deserialize_store(std::string_view bytes, const std::string& source_label);

void write_store(const SequenceStore& store, const std::string& path);
SequenceStore read_store(const std::string& path);

/// Hex FNV-1a of the exact serialized bytes; binds score tables and
/// manifests to the store they were computed from.
std::string store_content_hash(const SequenceStore& store);

}  // namespace seqprune
