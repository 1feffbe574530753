#include "seqprune/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

std::string band_name(Band band) {
  switch (band) {
    case Band::Bottom: return "bottom";
    case Band::Middle: return "middle";
    case Band::Top: return "top";
  }
  return "unknown";
}

Band band_from_name(const std::string& name) {
  if (name == "bottom") return Band::Bottom;
  if (name == "middle") return Band::Middle;
  if (name == "top") return Band::Top;
  raise(ErrorKind::ParseError, "unknown band '" + name + "'");
}

namespace {

void check_spec(const SelectionSpec& spec) {
  if (!(spec.keep_fraction > 0.0) || !(spec.keep_fraction <= 1.0)) {
    raise(ErrorKind::InvalidArgument, "keep_fraction must lie in (0, 1]");
  }
}

// Percentile window of a band, in [0, 100]. The middle band is centered on
// the median; width is always 100*f.
std::pair<double, double> band_percentiles(const SelectionSpec& spec) {
  const double f = spec.keep_fraction;
  switch (spec.band) {
    case Band::Bottom: return {0.0, 100.0 * f};
    case Band::Middle: return {50.0 - 50.0 * f, 50.0 + 50.0 * f};
    case Band::Top: return {100.0 - 100.0 * f, 100.0};
  }
  raise(ErrorKind::InvalidArgument, "unknown band");
}

}  // namespace

PercentileBounds percentile_bounds(const ScoreTable& table, const SelectionSpec& spec) {
  check_spec(spec);
  if (table.scores.empty()) {
    raise(ErrorKind::EmptyTable, "cannot take percentiles of an empty score table");
  }
  const auto [lo, hi] = band_percentiles(spec);
  std::vector<double> sorted = table.scores;
  std::sort(sorted.begin(), sorted.end());
  PercentileBounds bounds;
  bounds.lo_percentile = lo;
  bounds.hi_percentile = hi;
  bounds.lo_value = nearest_rank_value(sorted, lo);
  bounds.hi_value = nearest_rank_value(sorted, hi);
  return bounds;
}

std::vector<std::uint64_t> select(const ScoreTable& table, const SelectionSpec& spec) {
  check_spec(spec);
  const std::uint64_t n = table.scores.size();
  const auto keep =
      static_cast<std::uint64_t>(std::llround(spec.keep_fraction * static_cast<double>(n)));
  if (keep == 0) {
    raise(ErrorKind::EmptyKeep, "keep_fraction " + format_double(spec.keep_fraction) +
                                    " of " + std::to_string(n) +
                                    " sequences rounds to an empty selection");
  }

  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    if (table.scores[a] != table.scores[b]) return table.scores[a] < table.scores[b];
    return a < b;
  });

  const auto [lo, hi] = band_percentiles(spec);
  (void)hi;
  auto start =
      static_cast<std::int64_t>(std::llround(lo / 100.0 * static_cast<double>(n)));
  // The window must fit: rounding of the two ends is independent, so pull
  // the start back when start+keep would run past n.
  start = std::clamp<std::int64_t>(start, 0,
                                   static_cast<std::int64_t>(n - keep));

  std::vector<std::uint64_t> kept(order.begin() + start, order.begin() + start + keep);
  std::sort(kept.begin(), kept.end());
  return kept;
}

SequenceStore emit_pruned(const SequenceStore& store,
                          const std::vector<std::uint64_t>& kept) {
  if (kept.empty()) {
    raise(ErrorKind::EmptyKeep, "refusing to emit a store with no sequences");
  }
  const std::uint64_t n = store.num_sequences();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] >= n) {
      throw Error(ErrorKind::IdOutOfRange,
                  "kept id " + std::to_string(kept[i]) + " exceeds store size " +
                      std::to_string(n),
                  kept[i]);
    }
    if (i > 0 && kept[i] <= kept[i - 1]) {
      raise(ErrorKind::InvalidArgument, "kept ids must be sorted and unique");
    }
  }
  SequenceStore out;
  out.t = store.t;
  out.vocab_size = store.vocab_size;
  out.tokens.reserve(kept.size() * store.t);
  for (std::uint64_t id : kept) {
    const auto seq = store.sequence(id);
    out.tokens.insert(out.tokens.end(), seq.begin(), seq.end());
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  nlohmann::json doc{
      {"format", "seqprune-manifest"},
      {"version", 1},
      {"source_store",
       {{"path", manifest.source_store_path}, {"hash", manifest.source_store_hash}}},
      {"score_table",
       {{"path", manifest.score_table_path},
        {"hash", manifest.score_table_hash},
        {"metric", metric_name(manifest.metric)},
        {"model_tag", manifest.model_tag}}},
      {"selection",
       {{"band", band_name(manifest.spec.band)},
        {"keep_fraction", manifest.spec.keep_fraction}}},
      {"bounds",
       {{"lo_percentile", manifest.bounds.lo_percentile},
        {"hi_percentile", manifest.bounds.hi_percentile},
        {"lo_value", manifest.bounds.lo_value},
        {"hi_value", manifest.bounds.hi_value}}},
      {"kept_count", manifest.kept_count},
      {"kept_ids_file", manifest.kept_ids_file},
      {"tool_version", manifest.tool_version},
      {"created_at", manifest.created_at}};
  write_text_file(path, doc.dump(2) + "\n");
}

void write_kept_ids(const std::vector<std::uint64_t>& kept, const std::string& path) {
  std::string out;
  for (std::uint64_t id : kept) {
    out += std::to_string(id);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<std::uint64_t> read_kept_ids(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::uint64_t> ids;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::uint64_t id = 0;
    auto res = std::from_chars(line.data(), line.data() + line.size(), id);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size()) {
      raise(ErrorKind::ParseError, "'" + path + "' line " + std::to_string(line_no) +
                                       ": invalid seq_id '" + std::string(line) + "'");
    }
    ids.push_back(id);
  }
  return ids;
}

}  // namespace seqprune
