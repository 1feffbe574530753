#include "seqprune/ngram.hpp"

#include <algorithm>
#include <filesystem>
#include <utility>

#include <json.hpp>

#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

namespace {

constexpr char kCountsMagic[4] = {'N', 'G', 'C', 'T'};
constexpr std::uint32_t kCountsVersion = 1;

std::string pack_context(std::span<const std::uint32_t> context) {
  std::string key;
  key.reserve(context.size() * 4);
  for (std::uint32_t id : context) {
    key.push_back(static_cast<char>(id & 0xff));
    key.push_back(static_cast<char>((id >> 8) & 0xff));
    key.push_back(static_cast<char>((id >> 16) & 0xff));
    key.push_back(static_cast<char>((id >> 24) & 0xff));
  }
  return key;
}

std::vector<std::uint32_t> unpack_context(const std::string& key) {
  std::vector<std::uint32_t> tokens(key.size() / 4);
  const auto* p = reinterpret_cast<const unsigned char*>(key.data());
  for (std::size_t i = 0; i < tokens.size(); ++i, p += 4) {
    tokens[i] = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
                static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }
  return tokens;
}

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

// Forward-only reader over the serialized count table.
struct BlobReader {
  const unsigned char* p;
  std::size_t left;
  std::string label;

  void need(std::size_t n) const {
    if (left < n) {
      raise(ErrorKind::ParseError, "'" + label + "': truncated model count table");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
                      static_cast<std::uint32_t>(p[2]) << 16 |
                      static_cast<std::uint32_t>(p[3]) << 24;
    p += 4;
    left -= 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
};

}  // namespace

NGramReferenceModel::NGramReferenceModel(std::uint32_t order, double k,
                                         std::uint32_t vocab_size, std::string tag)
    : order_(order), k_(k), vocab_size_(vocab_size), tag_(std::move(tag)) {
  if (order_ == 0) raise(ErrorKind::InvalidArgument, "n-gram order must be at least 1");
  if (!(k_ > 0.0)) raise(ErrorKind::InvalidArgument, "smoothing constant k must be positive");
  if (vocab_size_ == 0) raise(ErrorKind::InvalidArgument, "model vocab_size must be at least 1");
  levels_.resize(order_);
}

const NGramReferenceModel::ContextCounts* NGramReferenceModel::find_backoff(
    std::span<const std::uint32_t> prefix) const {
  std::size_t c = std::min<std::size_t>(order_ - 1, prefix.size());
  for (;; --c) {
    const Level& level = levels_[c];
    if (!level.empty()) {
      auto it = level.find(pack_context(prefix.last(c)));
      if (it != level.end() && it->second.total > 0) return &it->second;
    }
    if (c == 0) return nullptr;
  }
}

std::vector<double> NGramReferenceModel::next_token_distribution(
    std::span<const std::uint32_t> prefix) const {
  for (std::uint32_t id : prefix.last(std::min<std::size_t>(order_ - 1, prefix.size()))) {
    if (id >= vocab_size_) {
      raise(ErrorKind::InvalidArgument, "prefix token id out of range for model vocabulary");
    }
  }
  std::vector<double> dist(vocab_size_);
  const ContextCounts* cc = find_backoff(prefix);
  if (cc == nullptr) {
    std::fill(dist.begin(), dist.end(), 1.0 / static_cast<double>(vocab_size_));
    return dist;
  }
  const double denom =
      static_cast<double>(cc->total) + k_ * static_cast<double>(vocab_size_);
  std::fill(dist.begin(), dist.end(), (0.0 + k_) / denom);
  for (const auto& [token, count] : cc->counts) {
    dist[token] = (static_cast<double>(count) + k_) / denom;
  }
  return dist;
}

double NGramReferenceModel::token_probability(std::span<const std::uint32_t> prefix,
                                              std::uint32_t token) const {
  if (token >= vocab_size_) {
    raise(ErrorKind::InvalidArgument, "token id out of range for model vocabulary");
  }
  for (std::uint32_t id : prefix.last(std::min<std::size_t>(order_ - 1, prefix.size()))) {
    if (id >= vocab_size_) {
      raise(ErrorKind::InvalidArgument, "prefix token id out of range for model vocabulary");
    }
  }
  const ContextCounts* cc = find_backoff(prefix);
  if (cc == nullptr) return 1.0 / static_cast<double>(vocab_size_);
  const double denom =
      static_cast<double>(cc->total) + k_ * static_cast<double>(vocab_size_);
  auto it = cc->counts.find(token);
  const double count = it == cc->counts.end() ? 0.0 : static_cast<double>(it->second);
  return (count + k_) / denom;
}

void NGramReferenceModel::fit(const SequenceStore& store) {
  if (store.num_sequences() == 0) {
    raise(ErrorKind::EmptyStore, "cannot fit a reference model on an empty store");
  }
  if (store.vocab_size > vocab_size_) {
    raise(ErrorKind::InvalidArgument, "store vocabulary exceeds model vocabulary");
  }
  for (std::uint64_t s = 0; s < store.num_sequences(); ++s) {
    const auto seq = store.sequence(s);
    for (std::uint32_t m = 1; m <= order_ && m <= seq.size(); ++m) {
      Level& level = levels_[m - 1];
      for (std::size_t j = 0; j + m <= seq.size(); ++j) {
        ContextCounts& cc = level[pack_context(seq.subspan(j, m - 1))];
        ++cc.counts[seq[j + m - 1]];
        ++cc.total;
      }
    }
  }
}

std::uint64_t NGramReferenceModel::count(std::span<const std::uint32_t> context,
                                         std::uint32_t token) const {
  if (context.size() >= order_) return 0;
  const Level& level = levels_[context.size()];
  auto it = level.find(pack_context(context));
  if (it == level.end()) return 0;
  auto jt = it->second.counts.find(token);
  return jt == it->second.counts.end() ? 0 : jt->second;
}

std::uint64_t NGramReferenceModel::context_total(
    std::span<const std::uint32_t> context) const {
  if (context.size() >= order_) return 0;
  const Level& level = levels_[context.size()];
  auto it = level.find(pack_context(context));
  return it == level.end() ? 0 : it->second.total;
}

NGramReferenceModel fit_ngram(const SequenceStore& store, std::uint32_t order, double k,
                              std::string tag) {
  NGramReferenceModel model(order, k, store.vocab_size, std::move(tag));
  model.fit(store);
  return model;
}

void save_ngram_model(const NGramReferenceModel& model, const std::string& path) {
  const std::string counts_name =
      std::filesystem::path(path).filename().string() + ".counts";

  nlohmann::json header{{"format", "seqprune-ngram"},
                        {"version", 1},
                        {"order", model.order_},
                        {"k", model.k_},
                        {"vocab_size", model.vocab_size_},
                        {"tag", model.tag_},
                        {"counts_file", counts_name}};
  write_text_file(path, header.dump(2) + "\n");

  std::string blob;
  blob.append(kCountsMagic, 4);
  put_u32(blob, kCountsVersion);
  put_u32(blob, model.order_);
  put_u32(blob, model.vocab_size_);
  for (std::uint32_t c = 0; c < model.order_; ++c) {
    const auto& level = model.levels_[c];
    std::vector<const std::string*> keys;
    keys.reserve(level.size());
    for (const auto& [key, counts] : level) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [](const std::string* a, const std::string* b) {
      const auto ta = unpack_context(*a);
      const auto tb = unpack_context(*b);
      return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
    });
    put_u64(blob, keys.size());
    for (const std::string* key : keys) {
      blob.append(*key);
      const auto& counts = level.at(*key).counts;
      std::vector<std::pair<std::uint32_t, std::uint64_t>> entries(counts.begin(),
                                                                   counts.end());
      std::sort(entries.begin(), entries.end());
      put_u32(blob, static_cast<std::uint32_t>(entries.size()));
      for (const auto& [token, count] : entries) {
        put_u32(blob, token);
        put_u64(blob, count);
      }
    }
  }
  write_text_file(std::filesystem::path(path).parent_path().empty()
                      ? counts_name
                      : (std::filesystem::path(path).parent_path() / counts_name).string(),
                  blob);
}

NGramReferenceModel load_ngram_model(const std::string& path) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::ParseError, "'" + path + "': " + e.what());
  }
  auto bad = [&](const std::string& why) {
    raise(ErrorKind::ParseError, "'" + path + "': " + why);
  };
  if (!header.is_object()) bad("model header is not a JSON object");
  if (header.value("format", "") != "seqprune-ngram") bad("not an n-gram model file");
  if (header.value("version", 0) != 1) bad("unsupported model version");
  if (!header.contains("order") || !header["order"].is_number_unsigned())
    bad("missing or invalid 'order'");
  if (!header.contains("k") || !header["k"].is_number()) bad("missing or invalid 'k'");
  if (!header.contains("vocab_size") || !header["vocab_size"].is_number_unsigned())
    bad("missing or invalid 'vocab_size'");
  if (!header.contains("counts_file") || !header["counts_file"].is_string())
    bad("missing or invalid 'counts_file'");

  const auto order = header["order"].get<std::uint32_t>();
  const auto k = header["k"].get<double>();
  const auto vocab_size = header["vocab_size"].get<std::uint32_t>();
  if (order == 0) bad("order must be at least 1");
  if (!(k > 0.0)) bad("k must be positive");
  if (vocab_size == 0) bad("vocab_size must be at least 1");

  NGramReferenceModel model(order, k, vocab_size, header.value("tag", ""));

  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  const std::string counts_path =
      parent.empty() ? header["counts_file"].get<std::string>()
                     : (parent / header["counts_file"].get<std::string>()).string();
  const std::string blob = read_text_file(counts_path);
  BlobReader r{reinterpret_cast<const unsigned char*>(blob.data()), blob.size(),
               counts_path};
  r.need(4);
  if (std::string_view(blob.data(), 4) != std::string_view(kCountsMagic, 4)) {
    raise(ErrorKind::ParseError, "'" + counts_path + "': bad count table magic");
  }
  r.p += 4;
  r.left -= 4;
  auto badc = [&](const std::string& why) {
    raise(ErrorKind::ParseError, "'" + counts_path + "': " + why);
  };
  if (r.u32() != kCountsVersion) badc("unsupported count table version");
  if (r.u32() != order) badc("count table order disagrees with model header");
  if (r.u32() != vocab_size) badc("count table vocab_size disagrees with model header");

  for (std::uint32_t c = 0; c < order; ++c) {
    const std::uint64_t num_contexts = r.u64();
    for (std::uint64_t i = 0; i < num_contexts; ++i) {
      r.need(static_cast<std::size_t>(c) * 4);
      std::string key(reinterpret_cast<const char*>(r.p), static_cast<std::size_t>(c) * 4);
      r.p += static_cast<std::size_t>(c) * 4;
      r.left -= static_cast<std::size_t>(c) * 4;
      for (std::uint32_t id : unpack_context(key)) {
        if (id >= vocab_size) badc("context token id out of range");
      }
      NGramReferenceModel::ContextCounts& cc = model.levels_[c][key];
      const std::uint32_t num_entries = r.u32();
      for (std::uint32_t e = 0; e < num_entries; ++e) {
        const std::uint32_t token = r.u32();
        const std::uint64_t count = r.u64();
        if (token >= vocab_size) badc("token id out of range in count table");
        if (count == 0) badc("zero count entry in count table");
        cc.counts[token] += count;
        cc.total += count;
      }
    }
  }
  if (r.left != 0) badc("trailing bytes after count table");
  return model;
}

}  // namespace seqprune
