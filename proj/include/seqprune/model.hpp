#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seqprune {

/// Capability set every reference model exposes to the scoring metrics:
/// next-token distributions, per-token NLL, and greedy continuation.
/// Implementations must be immutable once built; all calls are const and
/// safe to run concurrently.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;

  virtual std::uint32_t vocab_size() const = 0;

  /// Probability of every vocabulary entry following the prefix. Entries
  /// are strictly positive and sum to 1 within 1e-9.
  virtual std::vector<double> next_token_distribution(
      std::span<const std::uint32_t> prefix) const = 0;

  /// Probability of one specific token following the prefix. Must agree
  /// with the corresponding entry of next_token_distribution.
  virtual double token_probability(std::span<const std::uint32_t> prefix,
                                   std::uint32_t token) const;

  /// Entry j is -ln P(seq[j] | seq[0..j)); position 0 conditions on the
  /// empty prefix.
  virtual std::vector<double> nll_per_token(std::span<const std::uint32_t> seq) const;

  /// Argmax of the next-token distribution, ties to the lowest token id.
  virtual std::uint32_t greedy_next(std::span<const std::uint32_t> prefix) const;
};

/// Greedily extend the prompt by count tokens, feeding each generated
/// token back into the context.
std::vector<std::uint32_t> greedy_generate(const ScoringModel& model,
                                           std::span<const std::uint32_t> prompt,
                                           std::uint32_t count);

}  // namespace seqprune
