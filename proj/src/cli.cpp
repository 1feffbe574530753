#include "seqprune/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "seqprune/analysis.hpp"
#include "seqprune/corpus.hpp"
#include "seqprune/error.hpp"
#include "seqprune/ngram.hpp"
#include "seqprune/scores.hpp"
#include "seqprune/selection.hpp"
#include "seqprune/store.hpp"
#include "seqprune/tokenizer.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

namespace {

namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// Manifests and sidecars reference their inputs relative to their own
// directory so a run tree can be moved or compared as a whole.
std::string rel_path(const std::string& target, const std::string& base_dir) {
  const fs::path rel =
      fs::absolute(target).lexically_proximate(fs::absolute(base_dir));
  return rel.generic_string();
}

std::string file_stem(const std::string& path) {
  return fs::path(path).stem().string();
}

std::string sanitize_for_filename(const std::string& tag) {
  std::string out = tag.empty() ? std::string("model") : tag;
  for (char& c : out) {
    if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '.' && c != '_' &&
        c != '-') {
      c = '_';
    }
  }
  return out;
}

void write_resolved_config(const CLI::App& app, const std::string& path) {
  ensure_parent_dir(path);
  write_text_file(path, app.config_to_str(true, true));
}

// ---- pack ------------------------------------------------------------

struct PackArgs {
  std::string input;
  std::string format = "jsonl";
  std::uint32_t t = 128;
  std::uint32_t vocab_size = 512;
  std::string tokenizer_in;
  std::string tokenizer_out;
  std::string out;
};

void run_pack(const CLI::App& app, const PackArgs& args) {
  const CorpusFormat format =
      args.format == "text" ? CorpusFormat::PlainText : CorpusFormat::Jsonl;
  const std::vector<Document> docs = read_corpus(args.input, format);

  Tokenizer tokenizer = [&] {
    if (!args.tokenizer_in.empty()) return Tokenizer::load(args.tokenizer_in);
    return Tokenizer::train(docs, args.vocab_size);
  }();
  if (args.tokenizer_in.empty()) {
    const std::string tok_path =
        args.tokenizer_out.empty() ? args.out + ".tokenizer.json" : args.tokenizer_out;
    ensure_parent_dir(tok_path);
    tokenizer.save(tok_path);
  }

  const PackResult result = tokenize_and_pack(docs, tokenizer, args.t);
  ensure_parent_dir(args.out);
  write_store(result.store, args.out);
  write_resolved_config(app, args.out + ".config.toml");

  std::cout << "packed n=" << result.store.num_sequences() << " t=" << result.store.t
            << " vocab_size=" << result.store.vocab_size
            << " dropped=" << result.dropped_tokens << " -> " << args.out << "\n";
}

// ---- fit-model ---------------------------------------------------------

struct FitArgs {
  std::string store;
  std::uint32_t order = 3;
  double k = 0.1;
  std::string tag;
  std::string out;
};

void run_fit(const CLI::App& app, const FitArgs& args) {
  const SequenceStore store = read_store(args.store);
  const std::string tag = args.tag.empty() ? file_stem(args.out) : args.tag;
  const NGramReferenceModel model = fit_ngram(store, args.order, args.k, tag);
  ensure_parent_dir(args.out);
  save_ngram_model(model, args.out);
  write_resolved_config(app, args.out + ".config.toml");

  std::cout << "fitted order-" << args.order << " model (k=" << format_double(args.k)
            << ", tag=" << tag << ") on " << store.num_sequences() << " sequences -> "
            << args.out << "\n";
}

// ---- score -------------------------------------------------------------

struct ScoreArgs {
  std::string store;
  std::string metric;
  std::vector<std::string> models;
  std::uint32_t prompt_len = 32;
  std::uint32_t continuation_len = 32;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string prefix;
};

void run_score(const CLI::App& app, const ScoreArgs& args) {
  const SequenceStore store = read_store(args.store);
  const Metric metric = metric_from_name(args.metric);
  const std::string prefix = args.prefix.empty() ? args.metric : args.prefix;
  fs::create_directories(args.out_dir);

  ScoreParams params;
  params.prompt_len = args.prompt_len;
  params.continuation_len = args.continuation_len;
  params.seed = args.seed;

  auto table_path = [&](const std::string& tag) {
    return (fs::path(args.out_dir) / (prefix + "." + sanitize_for_filename(tag) + ".csv"))
        .string();
  };

  std::vector<std::string> written;
  if (metric == Metric::Random) {
    if (!args.models.empty()) {
      raise(ErrorKind::InvalidArgument, "the random metric takes no reference models");
    }
    const ScoreTable table = score_store(store, metric, nullptr, params, "random");
    TableMeta meta;
    meta.seed = args.seed;
    const std::string path = table_path(table.model_tag);
    write_score_table(table, path, meta);
    written.push_back(path);
  } else {
    if (args.models.empty()) {
      raise(ErrorKind::InvalidArgument,
            args.metric + " scoring requires at least one --model");
    }
    std::vector<ScoreTable> tables;
    std::vector<std::string> tags;
    for (const std::string& model_path : args.models) {
      const NGramReferenceModel model = load_ngram_model(model_path);
      const std::string tag =
          model.tag().empty() ? file_stem(model_path) : model.tag();
      for (const std::string& seen : tags) {
        if (seen == tag) {
          raise(ErrorKind::InvalidArgument,
                "two reference models share the tag '" + tag + "'");
        }
      }
      tags.push_back(tag);

      ScoreTable table = score_store(store, metric, &model, params, tag);
      TableMeta meta;
      meta.order = model.order();
      meta.k = model.smoothing_k();
      if (metric == Metric::Memorization) {
        meta.prompt_len = args.prompt_len;
        meta.continuation_len = args.continuation_len;
      }
      const std::string path = table_path(tag);
      write_score_table(table, path, meta);
      written.push_back(path);
      tables.push_back(std::move(table));
    }
    if (tables.size() >= 2) {
      const ScoreTable mean = ensemble_average(tables);
      TableMeta meta;
      meta.members = tags;
      std::sort(meta.members.begin(), meta.members.end());
      if (metric == Metric::Memorization) {
        meta.prompt_len = args.prompt_len;
        meta.continuation_len = args.continuation_len;
      }
      const std::string path =
          (fs::path(args.out_dir) / (prefix + ".mean.csv")).string();
      write_score_table(mean, path, meta);
      written.push_back(path);
    }
  }
  write_resolved_config(
      app, (fs::path(args.out_dir) / (prefix + ".config.toml")).string());

  for (const std::string& path : written) {
    std::cout << "scored metric=" << args.metric << " -> " << path << "\n";
  }
}

// ---- prune -------------------------------------------------------------

struct PruneArgs {
  std::string store;
  std::string table;
  std::string band = "middle";
  std::vector<double> keep_fractions;
  std::string out_dir;
};

void run_prune(const CLI::App& app, const PruneArgs& args) {
  const SequenceStore store = read_store(args.store);
  const ScoreTable table = read_score_table(args.table, store);
  const Band band = band_from_name(args.band);
  const std::vector<double> fractions =
      args.keep_fractions.empty() ? std::vector<double>{0.5} : args.keep_fractions;
  fs::create_directories(args.out_dir);

  for (double f : fractions) {
    SelectionSpec spec;
    spec.keep_fraction = f;
    spec.band = band;

    const PercentileBounds bounds = percentile_bounds(table, spec);
    const std::vector<std::uint64_t> kept = select(table, spec);
    const SequenceStore pruned = emit_pruned(store, kept);

    const std::string stem =
        args.band + "_f" + std::to_string(std::llround(f * 100.0));
    const std::string store_path = (fs::path(args.out_dir) / (stem + ".sqst")).string();
    const std::string kept_path =
        (fs::path(args.out_dir) / (stem + ".kept.txt")).string();
    const std::string manifest_path =
        (fs::path(args.out_dir) / (stem + ".manifest.json")).string();

    write_store(pruned, store_path);
    write_kept_ids(kept, kept_path);

    Manifest manifest;
    manifest.source_store_path = rel_path(args.store, args.out_dir);
    manifest.source_store_hash = store_content_hash(store);
    manifest.score_table_path = rel_path(args.table, args.out_dir);
    manifest.score_table_hash = table_content_hash(table);
    manifest.metric = table.metric;
    manifest.model_tag = table.model_tag;
    manifest.spec = spec;
    manifest.bounds = bounds;
    manifest.kept_count = kept.size();
    manifest.kept_ids_file = stem + ".kept.txt";
    manifest.tool_version = kToolVersion;
    manifest.created_at = current_timestamp();
    write_manifest(manifest, manifest_path);

    std::cout << "pruned band=" << args.band << " f=" << format_double(f)
              << " kept=" << kept.size() << "/" << store.num_sequences() << " -> "
              << store_path << "\n";
  }
  write_resolved_config(app, (fs::path(args.out_dir) / "prune.config.toml").string());
}

// ---- report ------------------------------------------------------------

struct ReportArgs {
  std::string store;
  std::string table;
  std::uint32_t bins = 64;
  double truncate_quantile = 0.999;
  std::string out;
};

std::string histogram_path_for(const std::string& json_path) {
  if (json_path.size() > 5 && json_path.ends_with(".json")) {
    return json_path.substr(0, json_path.size() - 5) + ".histogram.csv";
  }
  return json_path + ".histogram.csv";
}

void run_report(const CLI::App& app, const ReportArgs& args) {
  const SequenceStore store = read_store(args.store);
  const ScoreTable table = read_score_table(args.table, store);
  const DistributionReport report =
      distribution_report(table, args.bins, args.truncate_quantile);

  ensure_parent_dir(args.out);
  write_text_file(args.out, report_to_json(report));
  const std::string csv_path = histogram_path_for(args.out);
  write_text_file(csv_path, histogram_csv(report));
  write_resolved_config(app, args.out + ".config.toml");

  std::cout << "report metric=" << metric_name(report.metric)
            << " count=" << report.count << " -> " << args.out << ", " << csv_path
            << "\n";
}

// ---- compare -----------------------------------------------------------

struct CompareArgs {
  std::string store;
  std::string table_a;
  std::string table_b;
  std::string out;
};

void run_compare(const CLI::App& app, const CompareArgs& args) {
  const SequenceStore store = read_store(args.store);
  const ScoreTable a = read_score_table(args.table_a, store);
  const ScoreTable b = read_score_table(args.table_b, store);
  const ComparisonSummary summary = compare_reports(a, b);

  ensure_parent_dir(args.out);
  write_text_file(args.out, comparison_to_json(summary));
  write_resolved_config(app, args.out + ".config.toml");

  std::cout << "compared " << summary.model_tag_a << " vs " << summary.model_tag_b
            << " spearman="
            << (summary.spearman ? format_double(*summary.spearman) : "NA") << " -> "
            << args.out << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"corpus pruning pipeline: pack text, score sequences, keep a band"};
  app.name("seqprune");
  app.set_config("--config", "", "Read options from a TOML file (sections per subcommand)");
  app.require_subcommand(1);
  app.footer("Environment: SEQPRUNE_THREADS caps scoring worker threads;\n"
             "SOURCE_DATE_EPOCH pins manifest timestamps for reproducible runs.");

  PackArgs pack;
  CLI::App* pack_cmd = app.add_subcommand("pack", "Tokenize a corpus into a sequence store");
  pack_cmd->add_option("--input", pack.input, "Corpus file")->required();
  pack_cmd->add_option("--format", pack.format, "Corpus format")
      ->check(CLI::IsMember({"jsonl", "text"}))
      ->capture_default_str();
  pack_cmd->add_option("--t", pack.t, "Tokens per packed sequence")->capture_default_str();
  pack_cmd->add_option("--vocab-size", pack.vocab_size, "Tokenizer vocabulary budget")
      ->capture_default_str();
  pack_cmd->add_option("--tokenizer", pack.tokenizer_in,
                       "Reuse a saved tokenizer instead of training one");
  pack_cmd->add_option("--tokenizer-out", pack.tokenizer_out,
                       "Where to save the trained tokenizer (default: <out>.tokenizer.json)");
  pack_cmd->add_option("--out", pack.out, "Output store path")->required();
  pack_cmd->callback([&] { run_pack(app, pack); });

  FitArgs fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit-model", "Fit an n-gram reference model on a store");
  fit_cmd->add_option("--store", fit.store, "Input sequence store")->required();
  fit_cmd->add_option("--order", fit.order, "n-gram order")->capture_default_str();
  fit_cmd->add_option("--k", fit.k, "Add-k smoothing constant")->capture_default_str();
  fit_cmd->add_option("--tag", fit.tag, "Model tag (default: output file stem)");
  fit_cmd->add_option("--out", fit.out, "Output model path")->required();
  fit_cmd->callback([&] { run_fit(app, fit); });

  ScoreArgs score;
  CLI::App* score_cmd =
      app.add_subcommand("score", "Score every sequence of a store with one metric");
  score_cmd->add_option("--store", score.store, "Input sequence store")->required();
  score_cmd->add_option("--metric", score.metric, "Pruning metric")
      ->check(CLI::IsMember({"perplexity", "el2n", "memorization", "random"}))
      ->required();
  score_cmd->add_option("--model", score.models,
                        "Reference model file (repeat to score an ensemble)");
  score_cmd->add_option("--prompt-len", score.prompt_len,
                        "Memorization: prompt length M")
      ->capture_default_str();
  score_cmd->add_option("--continuation-len", score.continuation_len,
                        "Memorization: continuation length N")
      ->capture_default_str();
  score_cmd->add_option("--seed", score.seed, "Random metric seed")->capture_default_str();
  score_cmd->add_option("--out-dir", score.out_dir, "Directory for score tables")
      ->required();
  score_cmd->add_option("--prefix", score.prefix,
                        "Output filename prefix (default: metric name)");
  score_cmd->callback([&] { run_score(app, score); });

  PruneArgs prune;
  CLI::App* prune_cmd =
      app.add_subcommand("prune", "Keep one percentile band of a scored store");
  prune_cmd->add_option("--store", prune.store, "Input sequence store")->required();
  prune_cmd->add_option("--table", prune.table, "Score table CSV")->required();
  prune_cmd->add_option("--band", prune.band, "Score band to keep")
      ->check(CLI::IsMember({"bottom", "middle", "top"}))
      ->capture_default_str();
  prune_cmd->add_option("--keep", prune.keep_fractions,
                        "Keep fraction in (0,1]; repeat for a sweep (default 0.5)");
  prune_cmd->add_option("--out-dir", prune.out_dir, "Directory for pruned outputs")
      ->required();
  prune_cmd->callback([&] { run_prune(app, prune); });

  ReportArgs report;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Distribution report for a score table");
  report_cmd->add_option("--store", report.store, "Store the table was computed from")
      ->required();
  report_cmd->add_option("--table", report.table, "Score table CSV")->required();
  report_cmd->add_option("--bins", report.bins, "Histogram bin count")
      ->capture_default_str();
  report_cmd->add_option("--truncate-quantile", report.truncate_quantile,
                         "Cut the histogram range at this quantile")
      ->capture_default_str();
  report_cmd->add_option("--out", report.out, "Output report JSON path")->required();
  report_cmd->callback([&] { run_report(app, report); });

  CompareArgs compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Percentile deltas and rank correlation of two tables");
  compare_cmd->add_option("--store", compare.store, "Store both tables were computed from")
      ->required();
  compare_cmd->add_option("--table-a", compare.table_a, "First score table")->required();
  compare_cmd->add_option("--table-b", compare.table_b, "Second score table")->required();
  compare_cmd->add_option("--out", compare.out, "Output comparison JSON path")->required();
  compare_cmd->callback([&] { run_compare(app, compare); });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("seqprune");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: cli: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace seqprune
