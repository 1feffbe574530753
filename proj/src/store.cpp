#include "seqprune/store.hpp"

#include <fstream>

#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 8;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffULL));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint64_t get_u64(const unsigned char* p) {
  return static_cast<std::uint64_t>(get_u32(p)) | static_cast<std::uint64_t>(get_u32(p + 4)) << 32;
}

}  // namespace

std::string serialize_store(const SequenceStore& store) {
  std::string out;
  out.reserve(kHeaderSize + store.tokens.size() * 4);
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, store.t);
  put_u32(out, store.vocab_size);
  put_u64(out, store.num_sequences());
  for (std::uint32_t id : store.tokens) put_u32(out, id);
  return out;
}

SequenceStore deserialize_store(std::string_view bytes, const std::string& source_label) {
  auto corrupt = [&](const std::string& why) {
    raise(ErrorKind::CorruptStore, "'" + source_label + "': " + why);
  };
  if (bytes.size() < kHeaderSize) corrupt("file shorter than header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::string_view(bytes.data(), 4) != std::string_view(kMagic, 4)) corrupt("bad magic");
  std::uint32_t version = get_u32(p + 4);
  if (version != kVersion) corrupt("unsupported version " + std::to_string(version));

  SequenceStore store;
  store.t = get_u32(p + 8);
  store.vocab_size = get_u32(p + 12);
  std::uint64_t n = get_u64(p + 16);
  if (store.t == 0) corrupt("sequence length t is zero");
  if (store.vocab_size == 0) corrupt("vocab_size is zero");

  std::uint64_t payload_ids = (bytes.size() - kHeaderSize) / 4;
  if ((bytes.size() - kHeaderSize) % 4 != 0) corrupt("payload not a whole number of token ids");
  if (n != 0 && payload_ids / n != store.t) {
    corrupt("header declares " + std::to_string(n) + " sequences of " + std::to_string(store.t) +
            " tokens but payload holds " + std::to_string(payload_ids) + " ids");
  }
  if (n * store.t != payload_ids) corrupt("payload length mismatch");

  store.tokens.resize(payload_ids);
  const unsigned char* q = p + kHeaderSize;
  for (std::uint64_t i = 0; i < payload_ids; ++i, q += 4) {
    std::uint32_t id = get_u32(q);
    if (id >= store.vocab_size) {
      corrupt("token id " + std::to_string(id) + " out of range for vocab_size " +
              std::to_string(store.vocab_size));
    }
    store.tokens[i] = id;
  }
  return store;
}

void write_store(const SequenceStore& store, const std::string& path) {
  write_text_file(path, serialize_store(store));
}

SequenceStore read_store(const std::string& path) {
  return deserialize_store(read_text_file(path), path);
}

std::string store_content_hash(const SequenceStore& store) {
  return to_hex(fnv1a64(serialize_store(store)));
}

}  // namespace seqprune
