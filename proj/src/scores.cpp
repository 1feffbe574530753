#include "seqprune/scores.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <thread>
#include <utility>

#include <json.hpp>

#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::Perplexity: return "perplexity";
    case Metric::El2n: return "el2n";
    case Metric::Memorization: return "memorization";
    case Metric::Random: return "random";
    case Metric::External: return "external";
  }
  return "unknown";
}

Metric metric_from_name(const std::string& name) {
  if (name == "perplexity") return Metric::Perplexity;
  if (name == "el2n") return Metric::El2n;
  if (name == "memorization") return Metric::Memorization;
  if (name == "random") return Metric::Random;
  if (name == "external") return Metric::External;
  raise(ErrorKind::ParseError, "unknown metric '" + name + "'");
}

double perplexity_score(const ScoringModel& model, std::span<const std::uint32_t> seq) {
  if (seq.empty()) raise(ErrorKind::InvalidArgument, "cannot score an empty sequence");
  const std::vector<double> nll = model.nll_per_token(seq);
  double sum = 0.0;
  for (double v : nll) sum += v;
  return std::exp(sum / static_cast<double>(nll.size()));
}

double el2n_score(const ScoringModel& model, std::span<const std::uint32_t> seq) {
  if (seq.empty()) raise(ErrorKind::InvalidArgument, "cannot score an empty sequence");
  double sum = 0.0;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const std::vector<double> dist = model.next_token_distribution(seq.first(j));
    if (seq[j] >= dist.size()) {
      raise(ErrorKind::InvalidArgument, "token id out of range for model vocabulary");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const double target = i == seq[j] ? 1.0 : 0.0;
      const double diff = dist[i] - target;
      sq += diff * diff;
    }
    sum += std::sqrt(sq);
  }
  return sum / static_cast<double>(seq.size());
}

double memorization_score(const ScoringModel& model, std::span<const std::uint32_t> seq,
                          std::uint32_t prompt_len, std::uint32_t continuation_len) {
  if (prompt_len == 0 || continuation_len == 0) {
    raise(ErrorKind::InvalidArgument,
          "prompt and continuation lengths must be at least 1");
  }
  const std::uint64_t needed =
      static_cast<std::uint64_t>(prompt_len) + continuation_len;
  if (needed > seq.size()) {
    raise(ErrorKind::SequenceTooShort,
          "memorization needs " + std::to_string(needed) +
              " tokens but the sequence has " + std::to_string(seq.size()));
  }
  const std::vector<std::uint32_t> generated =
      greedy_generate(model, seq.first(prompt_len), continuation_len);
  std::uint32_t matches = 0;
  for (std::uint32_t i = 0; i < continuation_len; ++i) {
    if (generated[i] == seq[prompt_len + i]) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(continuation_len);
}

double random_score(std::uint64_t seq_id, std::uint64_t seed) {
  return unit_double(splitmix64(splitmix64(seed) + seq_id));
}

ScoreTable score_store(const SequenceStore& store, Metric metric,
                       const ScoringModel* model, const ScoreParams& params,
                       std::string model_tag) {
  if (store.num_sequences() == 0) {
    raise(ErrorKind::EmptyStore, "refusing to score an empty store");
  }
  if (metric == Metric::External) {
    raise(ErrorKind::InvalidArgument, "external score tables are imported, not computed");
  }
  if (metric != Metric::Random) {
    if (model == nullptr) {
      raise(ErrorKind::InvalidArgument,
            metric_name(metric) + " scoring requires a reference model");
    }
    if (model->vocab_size() < store.vocab_size) {
      raise(ErrorKind::InvalidArgument, "model vocabulary smaller than store vocabulary");
    }
  }

  const std::uint64_t n = store.num_sequences();
  ScoreTable table;
  table.metric = metric;
  table.model_tag = std::move(model_tag);
  table.store_hash = store_content_hash(store);
  table.scores.resize(n);

  auto score_one = [&](std::uint64_t i) -> double {
    switch (metric) {
      case Metric::Perplexity: return perplexity_score(*model, store.sequence(i));
      case Metric::El2n: return el2n_score(*model, store.sequence(i));
      case Metric::Memorization:
        return memorization_score(*model, store.sequence(i), params.prompt_len,
                                  params.continuation_len);
      case Metric::Random: return random_score(i, params.seed);
      case Metric::External: break;
    }
    raise(ErrorKind::InvalidArgument, "unsupported metric");
  };

  struct Failure {
    std::uint64_t seq_id;
    std::exception_ptr error;
  };

  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(worker_thread_count(), n));
  // Static contiguous chunks: each worker walks its range in ascending order
  // and stops at its first failure, so the failure with the smallest seq_id
  // is always the one reported.
  const std::uint64_t chunk = (n + workers - 1) / workers;
  std::vector<std::optional<Failure>> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::uint64_t lo = static_cast<std::uint64_t>(w) * chunk;
      const std::uint64_t hi = std::min(n, lo + chunk);
      for (std::uint64_t i = lo; i < hi; ++i) {
        try {
          table.scores[i] = score_one(i);
        } catch (const Error& e) {
          failures[w] = Failure{
              i, std::make_exception_ptr(Error(e.kind(), e.message(), i))};
          return;
        } catch (...) {
          failures[w] = Failure{i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  const Failure* first = nullptr;
  for (const auto& f : failures) {
    if (f && (first == nullptr || f->seq_id < first->seq_id)) first = &*f;
  }
  if (first != nullptr) std::rethrow_exception(first->error);
  return table;
}

ScoreTable ensemble_average(const std::vector<ScoreTable>& tables) {
  if (tables.empty()) {
    raise(ErrorKind::InvalidArgument, "ensemble average needs at least one table");
  }
  const ScoreTable& head = tables.front();
  for (const ScoreTable& t : tables) {
    if (t.metric != head.metric) {
      raise(ErrorKind::MixedMetrics, "cannot average " + metric_name(head.metric) +
                                         " with " + metric_name(t.metric) + " scores");
    }
    if (t.store_hash != head.store_hash) {
      raise(ErrorKind::StoreMismatch, "ensemble members score different stores");
    }
    if (t.scores.size() != head.scores.size()) {
      raise(ErrorKind::LengthMismatch, "ensemble members have different lengths");
    }
  }

  ScoreTable out;
  out.metric = head.metric;
  out.store_hash = head.store_hash;

  std::vector<std::string> tags;
  tags.reserve(tables.size());
  for (const ScoreTable& t : tables) tags.push_back(t.model_tag);
  std::sort(tags.begin(), tags.end());
  std::string joined;
  for (const std::string& tag : tags) {
    if (!joined.empty()) joined += ",";
    joined += tag;
  }
  out.model_tag = "mean(" + joined + ")";

  const std::size_t k = tables.size();
  out.scores.resize(head.scores.size());
  std::vector<double> values(k);
  for (std::size_t i = 0; i < head.scores.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) values[j] = tables[j].scores[i];
    // Summing in sorted order makes the mean independent of input order.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.scores[i] = sum / static_cast<double>(k);
  }
  return out;
}

std::string serialize_score_csv(const ScoreTable& table) {
  std::string out = "seq_id,score\n";
  for (std::size_t i = 0; i < table.scores.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(table.scores[i]);
    out += '\n';
  }
  return out;
}

void write_score_table(const ScoreTable& table, const std::string& path,
                       const TableMeta& meta) {
  write_text_file(path, serialize_score_csv(table));

  nlohmann::json params = nlohmann::json::object();
  if (meta.prompt_len) params["M"] = *meta.prompt_len;
  if (meta.continuation_len) params["N"] = *meta.continuation_len;
  if (meta.seed) params["seed"] = *meta.seed;
  if (meta.order) params["order"] = *meta.order;
  if (meta.k) params["k"] = *meta.k;
  if (!meta.members.empty()) params["members"] = meta.members;

  nlohmann::json sidecar{{"format", "seqprune-score-table"},
                         {"version", 1},
                         {"metric", metric_name(table.metric)},
                         {"model_tag", table.model_tag},
                         {"store_hash", table.store_hash},
                         {"params", params}};
  write_text_file(path + ".meta.json", sidecar.dump(2) + "\n");
}

namespace {

// One CSV line, split at the single comma; tolerates a trailing '\r'.
bool split_row(std::string_view line, std::string_view& left, std::string_view& right) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const std::size_t comma = line.find(',');
  if (comma == std::string_view::npos) return false;
  left = line.substr(0, comma);
  right = line.substr(comma + 1);
  return !left.empty() && !right.empty() && right.find(',') == std::string_view::npos;
}

}  // namespace

ScoreTable read_score_table(const std::string& path, const SequenceStore& store) {
  const std::string text = read_text_file(path);
  const std::uint64_t n = store.num_sequences();

  ScoreTable table;
  table.scores.assign(n, 0.0);
  table.store_hash = store_content_hash(store);
  std::vector<bool> seen(n, false);
  std::uint64_t filled = 0;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    auto bad = [&](const std::string& why) {
      raise(ErrorKind::ParseError,
            "'" + path + "' line " + std::to_string(line_no) + ": " + why);
    };

    if (!saw_header) {
      if (line != "seq_id,score") bad("expected header 'seq_id,score'");
      saw_header = true;
      continue;
    }

    std::string_view id_text, score_text;
    if (!split_row(line, id_text, score_text)) bad("expected 'seq_id,score' row");

    std::uint64_t id = 0;
    {
      auto res = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
      if (res.ec != std::errc() || res.ptr != id_text.data() + id_text.size()) {
        bad("invalid seq_id '" + std::string(id_text) + "'");
      }
    }
    double score = 0.0;
    if (!parse_double(score_text, score)) {
      bad("invalid score '" + std::string(score_text) + "'");
    }

    if (id >= n) {
      throw Error(ErrorKind::UnknownSeqId,
                  "'" + path + "' scores seq_id " + std::to_string(id) +
                      " but the store has " + std::to_string(n) + " sequences",
                  id);
    }
    if (seen[id]) {
      throw Error(ErrorKind::DuplicateSeqId,
                  "'" + path + "' scores seq_id " + std::to_string(id) + " twice", id);
    }
    seen[id] = true;
    table.scores[id] = score;
    ++filled;
  }
  if (!saw_header) {
    raise(ErrorKind::ParseError, "'" + path + "': missing 'seq_id,score' header");
  }
  if (filled != n) {
    raise(ErrorKind::LengthMismatch, "'" + path + "' covers " + std::to_string(filled) +
                                         " of " + std::to_string(n) + " sequences");
  }

  // Sidecar metadata is optional; when present it must describe this store.
  const std::string sidecar_path = path + ".meta.json";
  table.metric = Metric::External;
  table.model_tag = std::filesystem::path(path).stem().string();
  if (std::filesystem::exists(sidecar_path)) {
    nlohmann::json sidecar;
    try {
      sidecar = nlohmann::json::parse(read_text_file(sidecar_path));
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorKind::ParseError, "'" + sidecar_path + "': " + e.what());
    }
    if (!sidecar.is_object()) {
      raise(ErrorKind::ParseError, "'" + sidecar_path + "': not a JSON object");
    }
    if (sidecar.contains("metric")) {
      if (!sidecar["metric"].is_string()) {
        raise(ErrorKind::ParseError, "'" + sidecar_path + "': 'metric' must be a string");
      }
      table.metric = metric_from_name(sidecar["metric"].get<std::string>());
    }
    if (sidecar.contains("model_tag") && sidecar["model_tag"].is_string()) {
      table.model_tag = sidecar["model_tag"].get<std::string>();
    }
    if (sidecar.contains("store_hash") && sidecar["store_hash"].is_string()) {
      const std::string recorded = sidecar["store_hash"].get<std::string>();
      if (!recorded.empty() && recorded != table.store_hash) {
        raise(ErrorKind::StoreMismatch,
              "'" + path + "' was computed for store " + recorded +
                  " but this store hashes to " + table.store_hash);
      }
    }
  }
  return table;
}

std::string table_content_hash(const ScoreTable& table) {
  return to_hex(fnv1a64(serialize_score_csv(table)));
}

}  // namespace seqprune
