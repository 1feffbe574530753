#include "seqprune/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

namespace {

// {1, 5, 10, 20, ..., 90, 95, 99}
const std::vector<int>& percentile_ladder() {
  static const std::vector<int> ladder = {1,  5,  10, 20, 30, 40, 50,
                                          60, 70, 80, 90, 95, 99};
  return ladder;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) return std::nullopt;
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const auto n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;  // ranks always average to this
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

DistributionReport distribution_report(const ScoreTable& table, std::uint32_t bins,
                                       double truncate_quantile) {
  if (table.scores.empty()) {
    raise(ErrorKind::EmptyTable, "cannot report on an empty score table");
  }
  if (bins == 0) raise(ErrorKind::InvalidArgument, "histogram needs at least one bin");
  if (!(truncate_quantile >= 0.99) || !(truncate_quantile <= 1.0)) {
    raise(ErrorKind::InvalidArgument, "truncate_quantile must lie in [0.99, 1.0]");
  }

  std::vector<double> sorted = table.scores;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  DistributionReport report;
  report.metric = table.metric;
  report.model_tag = table.model_tag;
  report.count = n;
  report.min = sorted.front();
  report.max = sorted.back();
  report.truncate_quantile = truncate_quantile;

  double sum = 0.0;
  for (double v : sorted) sum += v;
  report.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : sorted) {
    const double d = v - report.mean;
    sq += d * d;
  }
  report.stddev = std::sqrt(sq / static_cast<double>(n));

  for (int p : percentile_ladder()) {
    report.percentiles.emplace_back(p, nearest_rank_value(sorted, p));
  }
  for (int p = 10; p <= 90; p += 10) {
    report.deciles.emplace_back(p, nearest_rank_value(sorted, p));
  }

  const double cutoff = nearest_rank_value(sorted, truncate_quantile * 100.0);
  const auto first_above = std::upper_bound(sorted.begin(), sorted.end(), cutoff);
  report.truncated_high = static_cast<std::uint64_t>(sorted.end() - first_above);
  const auto binned = static_cast<std::uint64_t>(first_above - sorted.begin());

  if (cutoff <= report.min) {
    // zero-width range: everything in range lands in one bin
    report.bin_edges = {report.min, cutoff};
    report.bin_counts = {binned};
    return report;
  }

  const double width = cutoff - report.min;
  report.bin_edges.reserve(bins + 1);
  for (std::uint32_t i = 0; i < bins; ++i) {
    report.bin_edges.push_back(report.min +
                               width * static_cast<double>(i) / static_cast<double>(bins));
  }
  report.bin_edges.push_back(cutoff);
  report.bin_counts.assign(bins, 0);
  for (auto it = sorted.begin(); it != first_above; ++it) {
    auto idx = static_cast<std::size_t>((*it - report.min) / width *
                                        static_cast<double>(bins));
    if (idx >= bins) idx = bins - 1;
    ++report.bin_counts[idx];
  }
  return report;
}

std::string report_to_json(const DistributionReport& report) {
  auto ladder = nlohmann::json::array();
  for (const auto& [p, value] : report.percentiles) {
    ladder.push_back({{"p", p}, {"value", value}});
  }
  auto deciles = nlohmann::json::array();
  for (const auto& [p, value] : report.deciles) {
    deciles.push_back({{"p", p}, {"value", value}});
  }
  nlohmann::json doc{{"format", "seqprune-report"},
                     {"version", 1},
                     {"metric", metric_name(report.metric)},
                     {"model_tag", report.model_tag},
                     {"count", report.count},
                     {"mean", report.mean},
                     {"stddev", report.stddev},
                     {"min", report.min},
                     {"max", report.max},
                     {"percentiles", ladder},
                     {"deciles", deciles},
                     {"histogram",
                      {{"truncate_quantile", report.truncate_quantile},
                       {"truncated_high", report.truncated_high},
                       {"bin_edges", report.bin_edges},
                       {"counts", report.bin_counts}}}};
  return doc.dump(2) + "\n";
}

std::string histogram_csv(const DistributionReport& report) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < report.bin_counts.size(); ++i) {
    out += format_double(report.bin_edges[i]);
    out += ',';
    out += format_double(report.bin_edges[i + 1]);
    out += ',';
    out += std::to_string(report.bin_counts[i]);
    out += '\n';
  }
  return out;
}

ComparisonSummary compare_reports(const ScoreTable& a, const ScoreTable& b) {
  if (a.metric != b.metric) {
    raise(ErrorKind::MetricMismatch, "cannot compare " + metric_name(a.metric) +
                                         " scores with " + metric_name(b.metric) +
                                         " scores");
  }
  if (a.scores.empty() || b.scores.empty()) {
    raise(ErrorKind::EmptyTable, "cannot compare empty score tables");
  }

  ComparisonSummary summary;
  summary.metric = a.metric;
  summary.model_tag_a = a.model_tag;
  summary.model_tag_b = b.model_tag;

  std::vector<double> sorted_a = a.scores;
  std::vector<double> sorted_b = b.scores;
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  for (int p : percentile_ladder()) {
    const double va = nearest_rank_value(sorted_a, p);
    const double vb = nearest_rank_value(sorted_b, p);
    summary.rows.push_back({p, va, vb, vb - va});
  }

  if (a.store_hash == b.store_hash && a.scores.size() == b.scores.size()) {
    summary.spearman = spearman_correlation(a.scores, b.scores);
  }
  return summary;
}

std::string comparison_to_json(const ComparisonSummary& summary) {
  auto rows = nlohmann::json::array();
  for (const auto& row : summary.rows) {
    rows.push_back({{"p", row.percentile},
                    {"a", row.value_a},
                    {"b", row.value_b},
                    {"delta", row.delta}});
  }
  nlohmann::json doc{{"format", "seqprune-comparison"},
                     {"version", 1},
                     {"metric", metric_name(summary.metric)},
                     {"model_tag_a", summary.model_tag_a},
                     {"model_tag_b", summary.model_tag_b},
                     {"percentiles", rows}};
  if (summary.spearman) {
    doc["spearman"] = *summary.spearman;
  } else {
    doc["spearman"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

}  // namespace seqprune
