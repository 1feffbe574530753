#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "seqprune/error.hpp"
#include "seqprune/ngram.hpp"
#include "seqprune/util.hpp"
#include "test_support.hpp"

using namespace seqprune;
using test::make_store;
using test::thrown_kind;

namespace {

std::vector<std::uint32_t> ids(std::initializer_list<std::uint32_t> v) { return v; }

}  // namespace

TEST_CASE("fit counts every window inside each sequence") {
  auto model = fit_ngram(make_store(3, 4, {{1, 1, 1}}), 2, 0.5);
  const auto ctx1 = ids({1});
  CHECK(model.count(ctx1, 1) == 2);
  CHECK(model.context_total(ctx1) == 2);
  CHECK(model.count({}, 1) == 3);  // unigram level sees all three tokens
  CHECK(model.context_total({}) == 3);
  CHECK(model.count(ctx1, 2) == 0);
  CHECK(model.context_total(ids({2})) == 0);
}

TEST_CASE("order-1 model keeps only unigrams") {
  auto model = fit_ngram(make_store(3, 4, {{1, 2, 3}}), 1, 0.5);
  CHECK(model.count({}, 1) == 1);
  CHECK(model.count({}, 2) == 1);
  CHECK(model.count({}, 3) == 1);
  CHECK(model.context_total({}) == 3);
}

TEST_CASE("counts are additive over sequences") {
  auto once = fit_ngram(make_store(3, 4, {{1, 1, 1}}), 2, 0.5);
  auto twice = fit_ngram(make_store(3, 4, {{1, 1, 1}, {1, 1, 1}}), 2, 0.5);
  const auto ctx1 = ids({1});
  CHECK(twice.count(ctx1, 1) == 2 * once.count(ctx1, 1));
  CHECK(twice.context_total({}) == 2 * once.context_total({}));
}

TEST_CASE("windows never cross sequence boundaries") {
  // Bigram (3, 5) only exists if counting ran across the two sequences.
  auto model = fit_ngram(make_store(2, 8, {{2, 3}, {5, 7}}), 2, 0.5);
  CHECK(model.count(ids({3}), 5) == 0);
  CHECK(model.count(ids({2}), 3) == 1);
  CHECK(model.count(ids({5}), 7) == 1);
}

TEST_CASE("untrained model predicts uniformly") {
  NGramReferenceModel model(2, 0.1, 4);
  for (const auto& prefix : {ids({}), ids({3}), ids({0, 1})}) {
    const auto dist = model.next_token_distribution(prefix);
    REQUIRE(dist.size() == 4);
    for (double p : dist) CHECK(p == 0.25);
  }
  const auto nll = model.nll_per_token(ids({2, 0, 1}));
  for (double v : nll) CHECK(v == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("add-k smoothing on a seen context") {
  auto model = fit_ngram(make_store(3, 4, {{1, 1, 1}}), 2, 1.0);
  const auto dist = model.next_token_distribution(ids({1}));
  // context [1]: count(1)=2, total=2, so p(1)=(2+1)/(2+4), others (0+1)/(2+4).
  CHECK(dist[1] == 0.5);
  CHECK(dist[0] == 1.0 / 6.0);
  CHECK(dist[2] == 1.0 / 6.0);
  CHECK(dist[3] == 1.0 / 6.0);
  double sum = 0.0;
  for (double p : dist) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nll backs off to the longest seen context") {
  auto model = fit_ngram(make_store(3, 4, {{1, 1, 1}}), 2, 1.0);
  const auto nll = model.nll_per_token(ids({1, 1, 1}));
  REQUIRE(nll.size() == 3);
  // Position 0 has no context, so the unigram level answers: (3+1)/(3+4).
  CHECK(nll[0] == doctest::Approx(std::log(7.0 / 4.0)).epsilon(1e-14));
  CHECK(nll[1] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(nll[2] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("token_probability agrees with the full distribution") {
  std::mt19937_64 rng(3);
  auto store = test::random_store(rng, 4, 6, 5);
  auto model = fit_ngram(store, 3, 0.1);
  std::uniform_int_distribution<std::uint32_t> tok(0, 4);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::uint32_t> prefix(rng() % 5);
    for (auto& id : prefix) id = tok(rng);
    const auto dist = model.next_token_distribution(prefix);
    double sum = 0.0;
    for (std::uint32_t w = 0; w < 5; ++w) {
      CHECK(model.token_probability(prefix, w) == dist[w]);  // bitwise
      CHECK(dist[w] > 0.0);
      sum += dist[w];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    // exp undoes the log within float noise.
    const std::vector<std::uint32_t> seq = {prefix.empty() ? 1 : prefix[0], 2};
    const auto nll = model.nll_per_token(seq);
    const auto d0 = model.next_token_distribution({});
    CHECK(std::exp(-nll[0]) == doctest::Approx(d0[seq[0]]).epsilon(1e-12));
  }
}

TEST_CASE("distributions match the brute-force recount exactly") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 30; ++round) {
    const std::uint32_t vocab = 2 + rng() % 5;       // 2..6
    const std::uint32_t order = 1 + rng() % 3;       // 1..3
    const std::uint32_t t = 3 + rng() % 4;           // 3..6
    const std::uint64_t n = 1 + rng() % 4;           // 1..4
    const double k = 0.05 + 0.1 * static_cast<double>(rng() % 10);
    auto store = test::random_store(rng, n, t, vocab);
    auto model = fit_ngram(store, order, k);
    std::uniform_int_distribution<std::uint32_t> tok(0, vocab - 1);
    for (int q = 0; q < 20; ++q) {
      std::vector<std::uint32_t> prefix(rng() % 6);
      for (auto& id : prefix) id = tok(rng);
      const auto got = model.next_token_distribution(prefix);
      const auto want = oracle::distribution(store, order, k, vocab, prefix);
      REQUIRE(got.size() == want.size());
      for (std::size_t w = 0; w < got.size(); ++w) CHECK(got[w] == want[w]);
    }
  }
}

TEST_CASE("greedy generation follows the argmax with low-id ties") {
  NGramReferenceModel untrained(2, 0.1, 4);
  CHECK(untrained.greedy_next({}) == 0);
  CHECK(greedy_generate(untrained, ids({2}), 3) == ids({0, 0, 0}));

  auto model = fit_ngram(make_store(4, 4, {{1, 2, 1, 2}}), 2, 0.1);
  CHECK(greedy_generate(model, ids({1}), 2) == ids({2, 1}));

  CHECK(thrown_kind([&] { greedy_generate(model, ids({1}), 0); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("greedy matches the oracle on random models") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 15; ++round) {
    const std::uint32_t vocab = 2 + rng() % 5;
    const std::uint32_t order = 1 + rng() % 3;
    auto store = test::random_store(rng, 2, 5, vocab);
    auto model = fit_ngram(store, order, 0.1);
    std::uniform_int_distribution<std::uint32_t> tok(0, vocab - 1);
    std::vector<std::uint32_t> prefix(1 + rng() % 3);
    for (auto& id : prefix) id = tok(rng);
    CHECK(model.greedy_next(prefix) == oracle::greedy_next(store, order, 0.1, vocab, prefix));
  }
}

TEST_CASE("constructor and fit validate their inputs") {
  CHECK(thrown_kind([] { NGramReferenceModel(0, 0.1, 4); }) == ErrorKind::InvalidArgument);
  CHECK(thrown_kind([] { NGramReferenceModel(2, 0.0, 4); }) == ErrorKind::InvalidArgument);
  CHECK(thrown_kind([] { NGramReferenceModel(2, -1.0, 4); }) == ErrorKind::InvalidArgument);
  CHECK(thrown_kind([] { NGramReferenceModel(2, 0.1, 0); }) == ErrorKind::InvalidArgument);

  NGramReferenceModel model(2, 0.1, 4);
  CHECK(thrown_kind([&] { model.fit(make_store(3, 4, {})); }) == ErrorKind::EmptyStore);
  CHECK(thrown_kind([&] { model.fit(make_store(2, 9, {{8, 8}})); }) ==
        ErrorKind::InvalidArgument);

  // Prefix/token ids beyond the vocabulary are caught at query time.
  CHECK(thrown_kind([&] { model.next_token_distribution(ids({9})); }) ==
        ErrorKind::InvalidArgument);
  CHECK(thrown_kind([&] { model.token_probability({}, 9); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("save and load reproduce the model bit for bit") {
  test::TempDir dir;
  std::mt19937_64 rng(31);
  auto store = test::random_store(rng, 6, 8, 7);
  auto model = fit_ngram(store, 3, 0.25, "ref-a");
  const auto path = dir.file("model.json");
  save_ngram_model(model, path);
  auto loaded = load_ngram_model(path);

  CHECK(loaded.order() == model.order());
  CHECK(loaded.smoothing_k() == model.smoothing_k());
  CHECK(loaded.vocab_size() == model.vocab_size());
  CHECK(loaded.tag() == "ref-a");

  std::uniform_int_distribution<std::uint32_t> tok(0, 6);
  for (int q = 0; q < 40; ++q) {
    std::vector<std::uint32_t> prefix(rng() % 4);
    for (auto& id : prefix) id = tok(rng);
    CHECK(loaded.next_token_distribution(prefix) == model.next_token_distribution(prefix));
  }

  // Saving the loaded copy over the same path reproduces both files exactly.
  const auto header_bytes = read_text_file(path);
  const auto counts_bytes = read_text_file(path + ".counts");
  save_ngram_model(loaded, path);
  CHECK(read_text_file(path) == header_bytes);
  CHECK(read_text_file(path + ".counts") == counts_bytes);
}

TEST_CASE("model loading rejects damaged files") {
  test::TempDir dir;
  auto model = fit_ngram(make_store(3, 4, {{1, 2, 3}}), 2, 0.5, "m");
  const auto path = dir.file("model.json");
  save_ngram_model(model, path);

  CHECK(thrown_kind([&] { load_ngram_model(dir.file("nope.json")); }) == ErrorKind::IoError);

  // Header tampering.
  write_text_file(path, "{\"format\":\"other\"}");
  CHECK(thrown_kind([&] { load_ngram_model(path); }) == ErrorKind::ParseError);

  // Valid header, truncated count table.
  save_ngram_model(model, path);
  auto counts = read_text_file(path + ".counts");
  write_text_file(path + ".counts", counts.substr(0, counts.size() / 2));
  CHECK(thrown_kind([&] { load_ngram_model(path); }) == ErrorKind::ParseError);

  // Trailing garbage after the count table.
  write_text_file(path + ".counts", counts + "x");
  CHECK(thrown_kind([&] { load_ngram_model(path); }) == ErrorKind::ParseError);

  // Bad magic.
  auto bad = counts;
  bad[0] = 'x';
  write_text_file(path + ".counts", bad);
  CHECK(thrown_kind([&] { load_ngram_model(path); }) == ErrorKind::ParseError);
}
