#include "seqprune/model.hpp"

#include <cmath>

#include "seqprune/error.hpp"

namespace seqprune {

double ScoringModel::token_probability(std::span<const std::uint32_t> prefix,
                                       std::uint32_t token) const {
  if (token >= vocab_size()) {
    raise(ErrorKind::InvalidArgument, "token id out of range for model vocabulary");
  }
  return next_token_distribution(prefix)[token];
}

std::vector<double> ScoringModel::nll_per_token(
    std::span<const std::uint32_t> seq) const {
  std::vector<double> nll;
  nll.reserve(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    nll.push_back(-std::log(token_probability(seq.first(j), seq[j])));
  }
  return nll;
}

std::uint32_t ScoringModel::greedy_next(std::span<const std::uint32_t> prefix) const {
  const std::vector<double> dist = next_token_distribution(prefix);
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.size(); ++i) {
    if (dist[i] > dist[best]) best = i;  // strict: ties keep the lowest id
  }
  return static_cast<std::uint32_t>(best);
}

std::vector<std::uint32_t> greedy_generate(const ScoringModel& model,
                                           std::span<const std::uint32_t> prompt,
                                           std::uint32_t count) {
  if (count == 0) {
    raise(ErrorKind::InvalidArgument, "generation length must be at least 1");
  }
  std::vector<std::uint32_t> context(prompt.begin(), prompt.end());
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t token = model.greedy_next(context);
    out.push_back(token);
    context.push_back(token);
  }
  return out;
}

}  // namespace seqprune
