#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqprune/scores.hpp"
#include "seqprune/store.hpp"

namespace seqprune {

enum class Band { Bottom, Middle, Top };

std::string band_name(Band band);
Band band_from_name(const std::string& name);

struct SelectionSpec {
  double keep_fraction = 0.5;  // f in (0, 1]
  Band band = Band::Middle;
};

/// Percentile window of a band and the score values at its edges. The
/// values are informational; selection itself happens in rank space.
struct PercentileBounds {
  double lo_percentile = 0.0;
  double hi_percentile = 0.0;
  double lo_value = 0.0;
  double hi_value = 0.0;
};

PercentileBounds percentile_bounds(const ScoreTable& table, const SelectionSpec& spec);

/// Kept seq_ids for the requested band: rank all sequences by (score, seq_id)
/// ascending and slice a window of exactly round(f*n) ranks. Result is
/// sorted by seq_id.
std::vector<std::uint64_t> select(const ScoreTable& table, const SelectionSpec& spec);

/// New store holding exactly the kept sequences, re-indexed densely in
/// their original relative order. `kept` must be sorted, unique, in range.
SequenceStore emit_pruned(const SequenceStore& store,
                          const std::vector<std::uint64_t>& kept);

/// Provenance record written next to a pruned store. Paths are relative to
/// the manifest's own directory.
struct Manifest {
  std::string source_store_path;
  std::string source_store_hash;
  std::string score_table_path;
  std::string score_table_hash;
  Metric metric = Metric::External;
  std::string model_tag;
  SelectionSpec spec;
  PercentileBounds bounds;
  std::uint64_t kept_count = 0;
  std::string kept_ids_file;
  std::string tool_version;
  std::string created_at;
};

void write_manifest(const Manifest& manifest, const std::string& path);

void write_kept_ids(const std::vector<std::uint64_t>& kept, const std::string& path);
std::vector<std::uint64_t> read_kept_ids(const std::string& path);

}  // namespace seqprune
