#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace titlegen {

/// TF-IDF retrieval over tokenized bodies: weight(t,d) = tf * ln(N/df),
/// vectors L2-normalized, cosine similarity.
class TfIdfIndex {
 public:
  struct Document {
    int64_t id;
    std::vector<std::string> body_tokens;
    std::string title;
  };

  struct Retrieval {
    int64_t doc_id = -1;
    std::string title;
    double similarity = 0;
    /// True when no indexed term matched; the lowest-id title is returned.
    bool zero_similarity = false;
  };

  /// Throws EmptyCorpus on an empty document list.
  static TfIdfIndex build(const std::vector<Document>& docs);

  /// Most similar document's title; ties break toward the lower document id.
  /// Throws EmptyQuery on a query with no tokens.
  Retrieval retrieve(const std::vector<std::string>& query_tokens) const;

  size_t corpus_size() const { return docs_.size(); }
  size_t term_count() const { return terms_.size(); }
  size_t document_frequency(const std::string& term) const;

  void save(const std::string& path) const;
  static TfIdfIndex load(const std::string& path);

 private:
  struct StoredDoc {
    int64_t id;
    std::string title;
    // (term index, weight), term index ascending
    std::vector<std::pair<uint32_t, double>> weights;
  };

  std::vector<double> weigh_query(const std::vector<std::string>& tokens) const;

  std::vector<std::string> terms_;  // index -> term
  std::unordered_map<std::string, uint32_t> term_index_;
  std::vector<uint64_t> df_;
  std::vector<StoredDoc> docs_;  // ascending id
};

/// Extractive upper bound: title tokens absent from the body are removed,
/// the remainder keeps its original order.
std::vector<std::string> oracle_title(const std::vector<std::string>& title_tokens,
                                      const std::vector<std::string>& body_tokens);

}  // namespace titlegen
