#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqprune/model.hpp"
#include "seqprune/store.hpp"

namespace seqprune {

/// Add-k smoothed n-gram model with longest-match backoff.
///
/// Counts are kept per context length 0..order-1. At query time the longest
/// trailing slice of the prefix with observed counts wins; if even the empty
/// context is unseen (untrained model) the distribution is uniform. With a
/// matching context c the probability of token w is
///
///   (count(c, w) + k) / (total(c) + k * vocab_size)
///
/// so every token keeps nonzero mass and the distribution sums to 1.
class NGramReferenceModel final : public ScoringModel {
 public:
  /// Empty (untrained) model. order >= 1, k > 0, vocab_size >= 1.
  NGramReferenceModel(std::uint32_t order, double k, std::uint32_t vocab_size,
                      std::string tag = {});

  std::uint32_t vocab_size() const override { return vocab_size_; }
  std::uint32_t order() const { return order_; }
  double smoothing_k() const { return k_; }
  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  std::vector<double> next_token_distribution(
      std::span<const std::uint32_t> prefix) const override;
  double token_probability(std::span<const std::uint32_t> prefix,
                           std::uint32_t token) const override;

  /// Accumulate every window of length 1..order from each sequence of the
  /// store. Windows never span sequence boundaries.
  void fit(const SequenceStore& store);

  /// Raw count of `token` after exactly `context` (context length selects
  /// the level); zero when unseen.
  std::uint64_t count(std::span<const std::uint32_t> context, std::uint32_t token) const;
  /// Total count mass behind exactly `context`; zero when unseen.
  std::uint64_t context_total(std::span<const std::uint32_t> context) const;

 private:
  struct ContextCounts {
    std::unordered_map<std::uint32_t, std::uint64_t> counts;
    std::uint64_t total = 0;
  };
  // One map per context length; keys are the context token ids packed as
  // little-endian bytes, so lookups need no custom hasher.
  using Level = std::unordered_map<std::string, ContextCounts>;

  const ContextCounts* find_backoff(std::span<const std::uint32_t> prefix) const;

  std::uint32_t order_;
  double k_;
  std::uint32_t vocab_size_;
  std::string tag_;
  std::vector<Level> levels_;

  friend void save_ngram_model(const NGramReferenceModel&, const std::string&);
  friend NGramReferenceModel load_ngram_model(const std::string&);
};

/// Convenience: construct and fit in one step.
NGramReferenceModel fit_ngram(const SequenceStore& store, std::uint32_t order,
                              double k, std::string tag = {});

/// Writes a JSON header at `path` plus a binary count table at
/// `path + ".counts"`. Byte-identical for equal models.
void save_ngram_model(const NGramReferenceModel& model, const std::string& path);
NGramReferenceModel load_ngram_model(const std::string& path);

}  // namespace seqprune
