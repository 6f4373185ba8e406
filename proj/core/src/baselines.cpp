#include "titlegen/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "titlegen/errors.hpp"

namespace titlegen {

namespace {

std::unordered_map<std::string, size_t> term_counts(
    const std::vector<std::string>& tokens) {
  std::unordered_map<std::string, size_t> counts;
  for (const auto& t : tokens) counts[t] += 1;
  return counts;
}

}  // namespace

TfIdfIndex TfIdfIndex::build(const std::vector<Document>& docs) {
  if (docs.empty()) throw EmptyCorpus("tf-idf: empty corpus");

  TfIdfIndex index;
  std::unordered_map<std::string, uint64_t> df;
  std::vector<std::unordered_map<std::string, size_t>> tf;
  tf.reserve(docs.size());
  for (const auto& doc : docs) {
    tf.push_back(term_counts(doc.body_tokens));
    for (const auto& [term, count] : tf.back()) df[term] += 1;
  }

  index.terms_.reserve(df.size());
  for (const auto& [term, count] : df) index.terms_.push_back(term);
  std::sort(index.terms_.begin(), index.terms_.end());
  for (uint32_t i = 0; i < index.terms_.size(); ++i) {
    index.term_index_[index.terms_[i]] = i;
  }
  index.df_.resize(index.terms_.size());
  for (size_t i = 0; i < index.terms_.size(); ++i) index.df_[i] = df[index.terms_[i]];

  double n = static_cast<double>(docs.size());
  for (size_t d = 0; d < docs.size(); ++d) {
    StoredDoc stored;
    stored.id = docs[d].id;
    stored.title = docs[d].title;
    double norm_sq = 0;
    for (const auto& [term, count] : tf[d]) {
      uint32_t idx = index.term_index_.at(term);
      double w = static_cast<double>(count) *
                 std::log(n / static_cast<double>(index.df_[idx]));
      if (w != 0.0) {
        stored.weights.emplace_back(idx, w);
        norm_sq += w * w;
      }
    }
    // A one-document corpus (or all-ubiquitous terms) yields an all-zero
    // vector; kept unnormalized.
    if (norm_sq > 0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [idx, w] : stored.weights) w *= inv;
    }
    std::sort(stored.weights.begin(), stored.weights.end());
    index.docs_.push_back(std::move(stored));
  }
  std::sort(index.docs_.begin(), index.docs_.end(),
            [](const StoredDoc& a, const StoredDoc& b) { return a.id < b.id; });
  return index;
}

size_t TfIdfIndex::document_frequency(const std::string& term) const {
  auto it = term_index_.find(term);
  return it == term_index_.end() ? 0 : df_[it->second];
}

std::vector<double> TfIdfIndex::weigh_query(
    const std::vector<std::string>& tokens) const {
  std::vector<double> query(terms_.size(), 0.0);
  double n = static_cast<double>(docs_.size());
  for (const auto& [term, count] : term_counts(tokens)) {
    auto it = term_index_.find(term);
    if (it == term_index_.end()) continue;
    query[it->second] = static_cast<double>(count) *
                        std::log(n / static_cast<double>(df_[it->second]));
  }
  double norm_sq = 0;
  for (double w : query) norm_sq += w * w;
  if (norm_sq > 0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& w : query) w *= inv;
  }
  return query;
}

TfIdfIndex::Retrieval TfIdfIndex::retrieve(
    const std::vector<std::string>& query_tokens) const {
  if (query_tokens.empty()) throw EmptyQuery("tf-idf: empty query");
  std::vector<double> query = weigh_query(query_tokens);

  Retrieval best;
  best.doc_id = docs_.front().id;
  best.title = docs_.front().title;
  best.similarity = -1;
  for (const auto& doc : docs_) {
    double sim = 0;
    for (const auto& [idx, w] : doc.weights) sim += w * query[idx];
    // Strict > keeps the lowest id on ties (documents are id-ascending).
    if (sim > best.similarity) {
      best.similarity = sim;
      best.doc_id = doc.id;
      best.title = doc.title;
    }
  }
  if (best.similarity <= 0.0) {
    best.similarity = std::max(best.similarity, 0.0);
    best.zero_similarity = true;
    best.doc_id = docs_.front().id;
    best.title = docs_.front().title;
  }
  return best;
}

namespace {

constexpr char kIndexMagic[8] = {'T', 'G', 'T', 'F', 'I', 'D', 'F', '\0'};
constexpr uint32_t kIndexVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("tf-idf index: truncated file");
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t len = read_pod<uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw IoError("tf-idf index: truncated string");
  return s;
}

}  // namespace

void TfIdfIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write tf-idf index: " + path);
  out.write(kIndexMagic, sizeof(kIndexMagic));
  write_pod<uint32_t>(out, kIndexVersion);
  write_pod<uint64_t>(out, docs_.size());
  write_pod<uint64_t>(out, terms_.size());
  for (size_t i = 0; i < terms_.size(); ++i) {
    write_string(out, terms_[i]);
    write_pod<uint64_t>(out, df_[i]);
  }
  for (const auto& doc : docs_) {
    write_pod<int64_t>(out, doc.id);
    write_string(out, doc.title);
    write_pod<uint64_t>(out, doc.weights.size());
    for (const auto& [idx, w] : doc.weights) {
      write_pod<uint32_t>(out, idx);
      write_pod<double>(out, w);
    }
  }
  if (!out) throw IoError("short write: " + path);
}

TfIdfIndex TfIdfIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tf-idf index: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
    throw IoError("not a tf-idf index file: " + path);
  }
  uint32_t version = read_pod<uint32_t>(in);
  if (version != kIndexVersion) {
    throw IoError("unsupported tf-idf index version " + std::to_string(version));
  }
  TfIdfIndex index;
  uint64_t n_docs = read_pod<uint64_t>(in);
  uint64_t n_terms = read_pod<uint64_t>(in);
  index.terms_.resize(n_terms);
  index.df_.resize(n_terms);
  for (uint64_t i = 0; i < n_terms; ++i) {
    index.terms_[i] = read_string(in);
    index.df_[i] = read_pod<uint64_t>(in);
    index.term_index_[index.terms_[i]] = static_cast<uint32_t>(i);
  }
  for (uint64_t d = 0; d < n_docs; ++d) {
    StoredDoc doc;
    doc.id = read_pod<int64_t>(in);
    doc.title = read_string(in);
    uint64_t nnz = read_pod<uint64_t>(in);
    doc.weights.resize(nnz);
    for (uint64_t i = 0; i < nnz; ++i) {
      doc.weights[i].first = read_pod<uint32_t>(in);
      doc.weights[i].second = read_pod<double>(in);
    }
    index.docs_.push_back(std::move(doc));
  }
  return index;
}

std::vector<std::string> oracle_title(const std::vector<std::string>& title_tokens,
                                      const std::vector<std::string>& body_tokens) {
  std::unordered_set<std::string> body_set(body_tokens.begin(), body_tokens.end());
  std::vector<std::string> out;
  for (const auto& t : title_tokens) {
    if (body_set.count(t)) out.push_back(t);
  }
  return out;
}

}  // namespace titlegen
