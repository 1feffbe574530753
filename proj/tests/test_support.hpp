#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "seqprune/error.hpp"
#include "seqprune/scores.hpp"
#include "seqprune/store.hpp"

namespace seqprune::test {

/// Runs fn and hands back the Error it threw, if any.
template <typename Fn>
std::optional<Error> catch_error(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
  } catch (const Error& e) {
    return e;
  }
  return std::nullopt;
}

template <typename Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
  auto err = catch_error(std::forward<Fn>(fn));
  if (!err) return std::nullopt;
  return err->kind();
}

/// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("seqprune-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline SequenceStore make_store(std::uint32_t t, std::uint32_t vocab_size,
                                const std::vector<std::vector<std::uint32_t>>& seqs) {
  SequenceStore store;
  store.t = t;
  store.vocab_size = vocab_size;
  for (const auto& seq : seqs) {
    store.tokens.insert(store.tokens.end(), seq.begin(), seq.end());
  }
  return store;
}

inline SequenceStore random_store(std::mt19937_64& rng, std::uint64_t n,
                                  std::uint32_t t, std::uint32_t vocab_size) {
  SequenceStore store;
  store.t = t;
  store.vocab_size = vocab_size;
  std::uniform_int_distribution<std::uint32_t> pick(0, vocab_size - 1);
  store.tokens.resize(n * t);
  for (auto& id : store.tokens) id = pick(rng);
  return store;
}

inline ScoreTable make_table(std::vector<double> scores, Metric metric = Metric::External,
                             std::string tag = "test", std::string store_hash = "h") {
  ScoreTable table;
  table.metric = metric;
  table.model_tag = std::move(tag);
  table.store_hash = std::move(store_hash);
  table.scores = std::move(scores);
  return table;
}

}  // namespace seqprune::test
