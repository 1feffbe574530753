#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "seqprune/analysis.hpp"
#include "seqprune/error.hpp"
#include "seqprune/util.hpp"
#include "test_support.hpp"

using namespace seqprune;
using test::make_table;
using test::thrown_kind;

TEST_CASE("report statistics on 1..100") {
  std::vector<double> scores(100);
  for (int i = 0; i < 100; ++i) scores[i] = static_cast<double>(i + 1);
  std::shuffle(scores.begin(), scores.end(), std::mt19937_64(3));

  auto report = distribution_report(make_table(scores, Metric::Perplexity, "m"), 10, 0.999);
  CHECK(report.count == 100);
  CHECK(report.metric == Metric::Perplexity);
  CHECK(report.model_tag == "m");
  CHECK(report.min == 1.0);
  CHECK(report.max == 100.0);
  CHECK(report.mean == doctest::Approx(50.5).epsilon(1e-13));
  // population stddev of 1..n is sqrt((n^2 - 1) / 12)
  CHECK(report.stddev == doctest::Approx(std::sqrt(833.25)).epsilon(1e-13));

  for (const auto& [p, value] : report.deciles) {
    CHECK(value == static_cast<double>(p));  // decile p of 1..100 is exactly p
  }
  CHECK(report.percentiles.front() == std::pair<int, double>{1, 1.0});
  CHECK(report.percentiles.back() == std::pair<int, double>{99, 99.0});
}

TEST_CASE("nearest-rank percentiles match the index formula for every n") {
  for (int n = 1; n <= 300; ++n) {
    std::vector<double> sorted(n);
    for (int i = 0; i < n; ++i) sorted[i] = static_cast<double>(i + 1);
    for (int p : {1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99, 100}) {
      CHECK(nearest_rank_value(sorted, p) == oracle::nearest_rank(sorted, p));
    }
    CHECK(nearest_rank_value(sorted, 0.0) == 1.0);
    CHECK(nearest_rank_value(sorted, -3.0) == 1.0);
    CHECK(nearest_rank_value(sorted, 100.0) == static_cast<double>(n));
  }
}

TEST_CASE("constant scores collapse to a single bin") {
  auto report = distribution_report(make_table(std::vector<double>(50, 2.5)), 64, 0.999);
  CHECK(report.stddev == 0.0);
  CHECK(report.min == 2.5);
  CHECK(report.max == 2.5);
  CHECK(report.bin_edges == std::vector<double>{2.5, 2.5});
  CHECK(report.bin_counts == std::vector<std::uint64_t>{50});
  CHECK(report.truncated_high == 0);
  for (const auto& [p, value] : report.percentiles) CHECK(value == 2.5);
}

TEST_CASE("histogram conserves mass") {
  std::mt19937_64 rng(141);
  std::uniform_real_distribution<double> val(-5.0, 17.0);
  for (int round = 0; round < 25; ++round) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<double> scores(n);
    for (auto& s : scores) s = val(rng);
    const std::uint32_t bins = 1 + rng() % 80;
    auto report = distribution_report(make_table(scores), bins, 0.999);
    std::uint64_t total = report.truncated_high;
    for (auto c : report.bin_counts) total += c;
    CHECK(total == n);
    REQUIRE(report.bin_edges.size() == report.bin_counts.size() + 1);
    CHECK(std::is_sorted(report.bin_edges.begin(), report.bin_edges.end()));
    CHECK(report.bin_edges.front() == report.min);
  }
}

TEST_CASE("truncation keeps the advertised tail out of the histogram") {
  std::vector<double> scores(10000);
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = static_cast<double>(i);
  std::shuffle(scores.begin(), scores.end(), std::mt19937_64(5));
  auto report = distribution_report(make_table(scores), 64, 0.999);
  // cutoff is the nearest-rank 99.9th percentile: value 9989 of 0..9999
  CHECK(report.truncated_high == 10);
  CHECK(report.bin_edges.back() == 9989.0);

  // quantile 1.0 keeps everything
  auto full = distribution_report(make_table(scores), 64, 1.0);
  CHECK(full.truncated_high == 0);
  CHECK(full.bin_edges.back() == 9999.0);
}

TEST_CASE("report validates its arguments") {
  CHECK(thrown_kind([] { distribution_report(make_table({}), 10, 0.999); }) ==
        ErrorKind::EmptyTable);
  CHECK(thrown_kind([] { distribution_report(make_table({1.0}), 0, 0.999); }) ==
        ErrorKind::InvalidArgument);
  CHECK(thrown_kind([] { distribution_report(make_table({1.0}), 10, 0.5); }) ==
        ErrorKind::InvalidArgument);
  CHECK(thrown_kind([] { distribution_report(make_table({1.0}), 10, 1.01); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("report depends on values, not their order") {
  std::mt19937_64 rng(151);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::vector<double> scores(200);
  for (auto& s : scores) s = val(rng);
  auto a = report_to_json(distribution_report(make_table(scores), 32, 0.999));
  std::shuffle(scores.begin(), scores.end(), rng);
  auto b = report_to_json(distribution_report(make_table(scores), 32, 0.999));
  CHECK(a == b);
}

TEST_CASE("report json carries the full summary") {
  auto report = distribution_report(make_table({1.0, 2.0, 3.0, 4.0}, Metric::El2n, "ref"),
                                    2, 0.999);
  const auto doc = nlohmann::json::parse(report_to_json(report));
  CHECK(doc.at("format") == "seqprune-report");
  CHECK(doc.at("metric") == "el2n");
  CHECK(doc.at("model_tag") == "ref");
  CHECK(doc.at("count") == 4);
  CHECK(doc.at("percentiles").size() == 13);
  CHECK(doc.at("deciles").size() == 9);
  CHECK(doc.at("histogram").at("counts").size() == 2);
  CHECK(doc.at("histogram").at("bin_edges").size() == 3);

  const auto csv = histogram_csv(report);
  CHECK(csv.substr(0, csv.find('\n')) == "bin_lo,bin_hi,count");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 bins
}

TEST_CASE("comparing a table against itself is silent") {
  std::mt19937_64 rng(161);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::vector<double> scores(120);
  for (auto& s : scores) s = val(rng);
  auto table = make_table(scores, Metric::Perplexity, "a", "h");

  auto summary = compare_reports(table, table);
  CHECK(summary.rows.size() == 13);
  for (const auto& row : summary.rows) {
    CHECK(row.delta == 0.0);
    CHECK(row.value_a == row.value_b);
  }
  REQUIRE(summary.spearman.has_value());
  CHECK(*summary.spearman == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("comparison sees monotone agreement and disagreement") {
  std::mt19937_64 rng(171);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::vector<double> scores(80), doubled(80), negated(80);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = val(rng);
    doubled[i] = 2.0 * scores[i];
    negated[i] = -scores[i];
  }
  auto a = make_table(scores, Metric::Perplexity, "a", "h");
  auto b = make_table(doubled, Metric::Perplexity, "b", "h");
  auto c = make_table(negated, Metric::Perplexity, "c", "h");

  auto up = compare_reports(a, b);
  REQUIRE(up.spearman.has_value());
  CHECK(*up.spearman == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& row : up.rows) {
    CHECK(row.delta == doctest::Approx(row.value_a).epsilon(1e-12));  // 2x - x
  }

  auto down = compare_reports(a, c);
  REQUIRE(down.spearman.has_value());
  CHECK(*down.spearman == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("comparison guards metric and store identity") {
  auto a = make_table({1.0, 2.0}, Metric::Perplexity, "a", "h1");
  auto b = make_table({1.0, 2.0}, Metric::El2n, "b", "h1");
  CHECK(thrown_kind([&] { compare_reports(a, b); }) == ErrorKind::MetricMismatch);
  CHECK(thrown_kind([&] { compare_reports(make_table({}), make_table({})); }) ==
        ErrorKind::EmptyTable);

  // Different stores: percentile rows still make sense, rank correlation not.
  auto other = make_table({1.0, 2.0, 3.0}, Metric::Perplexity, "c", "h2");
  auto summary = compare_reports(a, other);
  CHECK(summary.rows.size() == 13);
  CHECK_FALSE(summary.spearman.has_value());
}

TEST_CASE("spearman handles ties and degenerate input") {
  CHECK(*spearman_correlation({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*spearman_correlation({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  // classic textbook value: displacements {-1,1,-1,1,0} give 1 - 24/120
  CHECK(*spearman_correlation({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}) ==
        doctest::Approx(0.8).epsilon(1e-12));
  // tied pairs get the average rank on both sides
  CHECK(*spearman_correlation({1, 2, 2, 3}, {10, 20, 20, 30}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(spearman_correlation({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_FALSE(spearman_correlation({}, {}).has_value());
  CHECK_FALSE(spearman_correlation({1, 2}, {1, 2, 3}).has_value());
}
