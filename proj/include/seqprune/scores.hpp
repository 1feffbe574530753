#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqprune/model.hpp"
#include "seqprune/store.hpp"

namespace seqprune {

enum class Metric {
  Perplexity,
  El2n,
  Memorization,
  Random,
  External,
};

std::string metric_name(Metric metric);
Metric metric_from_name(const std::string& name);

/// Knobs for the scoring pass. Only the fields relevant to the chosen
/// metric are consulted.
struct ScoreParams {
  std::uint32_t prompt_len = 32;        // memorization: tokens shown to the model
  std::uint32_t continuation_len = 32;  // memorization: tokens compared
  std::uint64_t seed = 0;               // random metric
};

/// One score per sequence of a store, in seq_id order, bound to the store
/// by content hash.
struct ScoreTable {
  Metric metric = Metric::External;
  std::string model_tag;
  std::string store_hash;
  std::vector<double> scores;

  std::uint64_t size() const { return scores.size(); }
};

/// exp of the mean per-token negative log-likelihood.
double perplexity_score(const ScoringModel& model, std::span<const std::uint32_t> seq);

/// Mean L2 distance between the predicted next-token distribution and the
/// one-hot target, over all positions.
double el2n_score(const ScoringModel& model, std::span<const std::uint32_t> seq);

/// Fraction of the N tokens after an M-token prompt that greedy generation
/// reproduces exactly. Requires prompt_len + continuation_len <= seq length.
double memorization_score(const ScoringModel& model, std::span<const std::uint32_t> seq,
                          std::uint32_t prompt_len, std::uint32_t continuation_len);

/// Deterministic hash-based score in [0, 1); depends only on (seq_id, seed).
double random_score(std::uint64_t seq_id, std::uint64_t seed);

/// Score every sequence of the store. `model` may be null only for
/// Metric::Random. Rows are computed in parallel but the result is
/// independent of the worker count.
ScoreTable score_store(const SequenceStore& store, Metric metric,
                       const ScoringModel* model, const ScoreParams& params = {},
                       std::string model_tag = {});

/// Element-wise mean of several tables for the same metric and store.
/// Invariant under reordering of the inputs, bit for bit.
ScoreTable ensemble_average(const std::vector<ScoreTable>& tables);

/// Optional descriptors recorded next to a score table so a run can be
/// reproduced from its outputs alone.
struct TableMeta {
  std::optional<std::uint32_t> prompt_len;
  std::optional<std::uint32_t> continuation_len;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> order;
  std::optional<double> k;
  std::vector<std::string> members;  // ensemble member tags
};

std::string serialize_score_csv(const ScoreTable& table);

/// CSV at `path` plus a JSON sidecar at `path + ".meta.json"`.
void write_score_table(const ScoreTable& table, const std::string& path,
                       const TableMeta& meta = {});

/// Read a score table (ours or external) and bind it to `store`. The CSV
/// must cover every seq_id of the store exactly once; a sidecar, when
/// present, must agree with the store hash. Tables without a sidecar come
/// back as Metric::External, tagged with the file stem.
ScoreTable read_score_table(const std::string& path, const SequenceStore& store);

/// Externally computed scores (e.g. from a real LLM reference model) enter
/// the pipeline through the same file contract.
inline ScoreTable import_external_scores(const std::string& path,
                                         const SequenceStore& store) {
  return read_score_table(path, store);
}

/// Content hash of the canonical CSV serialization.
std::string table_content_hash(const ScoreTable& table);

}  // namespace seqprune
