#include "seqprune/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include <json.hpp>
#include "seqprune/error.hpp"
#include "seqprune/util.hpp"

namespace seqprune {

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void check_document(const Document& doc, std::unordered_set<std::string>& seen_ids,
                    const std::string& where) {
  if (!seen_ids.insert(doc.doc_id).second) {
    raise(ErrorKind::DuplicateDocId, "duplicate doc_id '" + doc.doc_id + "' at " + where);
  }
  if (is_blank(doc.text)) {
    raise(ErrorKind::InvalidDocument, "document '" + doc.doc_id + "' at " + where +
                                          " has no text after whitespace trim");
  }
}

}  // namespace

std::vector<Document> parse_jsonl_corpus(const std::string& content,
                                         const std::string& source_label) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen_ids;
  std::istringstream in(content);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::string where = source_label + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorKind::ParseError, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j["id"].is_string() ||
        !j["text"].is_string()) {
      raise(ErrorKind::ParseError, where + ": expected an object with string fields id, text");
    }
    Document doc{j["id"].get<std::string>(), j["text"].get<std::string>()};
    check_document(doc, seen_ids, where);
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) raise(ErrorKind::EmptyCorpus, source_label + " holds no documents");
  return docs;
}

std::vector<Document> parse_plain_text_corpus(const std::string& content) {
  std::vector<Document> docs;
  std::istringstream in(content);
  std::string line, block;
  auto flush = [&]() {
    if (!block.empty()) {
      docs.push_back({"doc-" + std::to_string(docs.size()), block});
      block.clear();
    }
  };
  while (std::getline(in, line)) {
    if (is_blank(line)) {
      flush();
    } else {
      if (!block.empty()) block += '\n';
      block += line;
    }
  }
  flush();
  if (docs.empty()) raise(ErrorKind::EmptyCorpus, "plain text input holds no documents");
  return docs;
}

std::vector<Document> read_corpus(const std::string& path, CorpusFormat format) {
  std::string content = read_text_file(path);
  return format == CorpusFormat::Jsonl ? parse_jsonl_corpus(content, path)
                                       : parse_plain_text_corpus(content);
}

PackResult tokenize_and_pack(const std::vector<Document>& docs, const Tokenizer& tokenizer,
                             std::uint32_t t) {
  if (t < 2) raise(ErrorKind::InvalidArgument, "context length t must be at least 2");
  if (docs.empty()) raise(ErrorKind::EmptyCorpus, "no documents to pack");

  PackResult result;
  result.store.t = t;
  result.store.vocab_size = tokenizer.vocab_size();

  std::vector<std::uint32_t> stream;
  for (const auto& doc : docs) {
    std::vector<std::uint32_t> ids = tokenizer.encode(doc.text);
    for (std::uint32_t id : ids) {
      if (id >= tokenizer.vocab_size()) {
        raise(ErrorKind::TokenIdOverflow, "encode produced id " + std::to_string(id) +
                                              " >= vocab_size in document '" + doc.doc_id + "'");
      }
    }
    stream.insert(stream.end(), ids.begin(), ids.end());
    stream.push_back(tokenizer.eod_id());
  }

  result.total_tokens = stream.size();
  std::uint64_t n = result.total_tokens / t;
  result.dropped_tokens = result.total_tokens - n * t;
  stream.resize(n * t);
  result.store.tokens = std::move(stream);
  return result;
}

}  // namespace seqprune
