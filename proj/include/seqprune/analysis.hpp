#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqprune/scores.hpp"

namespace seqprune {

/// Summary statistics of one score table: moments, a fixed percentile
/// ladder, decile markers, and an equal-width histogram whose range is cut
/// at `truncate_quantile` so a handful of extreme outliers cannot flatten
/// every other bin.
struct DistributionReport {
  Metric metric = Metric::External;
  std::string model_tag;

  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;

  // (percentile, value) at {1, 5, 10, 20, ..., 90, 95, 99}.
  std::vector<std::pair<int, double>> percentiles;
  // (percentile, value) at every 10th percentile: 10, 20, ..., 90.
  std::vector<std::pair<int, double>> deciles;

  std::vector<double> bin_edges;  // bins + 1 edges over [min, cutoff]
  std::vector<std::uint64_t> bin_counts;
  std::uint64_t truncated_high = 0;  // scores above the cutoff, not binned
  double truncate_quantile = 0.0;
};

/// bins >= 1, truncate_quantile in [0.99, 1.0].
DistributionReport distribution_report(const ScoreTable& table, std::uint32_t bins,
                                       double truncate_quantile);

std::string report_to_json(const DistributionReport& report);
/// "bin_lo,bin_hi,count" rows, one per histogram bin.
std::string histogram_csv(const DistributionReport& report);

/// Percentile-by-percentile difference of two tables of the same metric,
/// plus a Spearman rank correlation when both tables score the same store.
struct ComparisonSummary {
  Metric metric = Metric::External;
  std::string model_tag_a;
  std::string model_tag_b;

  struct Row {
    int percentile;
    double value_a;
    double value_b;
    double delta;  // value_b - value_a
  };
  std::vector<Row> rows;

  // Absent when the tables cover different stores or either side has zero
  // rank variance.
  std::optional<double> spearman;
};

ComparisonSummary compare_reports(const ScoreTable& a, const ScoreTable& b);

std::string comparison_to_json(const ComparisonSummary& summary);

/// Spearman rank correlation with average ranks for ties; nullopt when
/// either side is constant.
std::optional<double> spearman_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b);

}  // namespace seqprune
