#include "titlegen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "titlegen/errors.hpp"

namespace titlegen {

namespace {

// N-gram multiset keyed by the joined token string ('\x1f' never appears in
// tokens produced by the tokenizer).
std::unordered_map<std::string, size_t> ngram_counts(const TokenList& tokens,
                                                     size_t n) {
  std::unordered_map<std::string, size_t> counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k];
    }
    counts[key] += 1;
  }
  return counts;
}

size_t clipped_overlap(const std::unordered_map<std::string, size_t>& a,
                       const std::unordered_map<std::string, size_t>& b) {
  size_t hits = 0;
  for (const auto& [gram, count] : a) {
    auto it = b.find(gram);
    if (it != b.end()) hits += std::min(count, it->second);
  }
  return hits;
}

}  // namespace

double bleus4(const TokenList& candidate, const TokenList& reference) {
  if (candidate.empty()) return 0.0;
  constexpr size_t kMaxOrder = 4;
  double log_sum = 0.0;
  for (size_t n = 1; n <= kMaxOrder; ++n) {
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);
    size_t total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
    size_t hits = clipped_overlap(cand, ref);
    double p;
    if (n == 1) {
      if (hits == 0) return 0.0;
      p = static_cast<double>(hits) / static_cast<double>(total);
    } else {
      p = static_cast<double>(hits + 1) / static_cast<double>(total + 1);
    }
    log_sum += std::log(p) / static_cast<double>(kMaxOrder);
  }
  double lc = static_cast<double>(candidate.size());
  double lr = static_cast<double>(reference.size());
  double bp = lc > lr ? 1.0 : std::exp(1.0 - lr / lc);
  return bp * std::exp(log_sum);
}

double rouge_n(const TokenList& candidate, const TokenList& reference, size_t n) {
  if (reference.empty()) throw EmptyReference("rouge_n: empty reference");
  if (candidate.empty()) return 0.0;
  if (reference.size() < n) return 0.0;
  auto cand = ngram_counts(candidate, n);
  auto ref = ngram_counts(reference, n);
  size_t total = reference.size() - n + 1;
  size_t hits = clipped_overlap(cand, ref);
  return static_cast<double>(hits) / static_cast<double>(total);
}

size_t lcs_length(const TokenList& a, const TokenList& b) {
  if (a.empty() || b.empty()) return 0;
  // One-row DP over the shorter sequence.
  const TokenList& rows = a.size() >= b.size() ? a : b;
  const TokenList& cols = a.size() >= b.size() ? b : a;
  std::vector<size_t> prev(cols.size() + 1, 0), cur(cols.size() + 1, 0);
  for (size_t i = 1; i <= rows.size(); ++i) {
    for (size_t j = 1; j <= cols.size(); ++j) {
      if (rows[i - 1] == cols[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[cols.size()];
}

double rouge_l(const TokenList& candidate, const TokenList& reference,
               const RougeLOptions& opts) {
  if (reference.empty()) throw EmptyInput("rouge_l: empty reference");
  if (candidate.empty()) return 0.0;
  size_t lcs = lcs_length(candidate, reference);
  if (lcs == 0) return 0.0;
  double recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
  double precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
  double f = recall * precision / (recall + precision);
  return opts.strict_printed_form ? f : 2.0 * f;
}

MetricReport evaluate_corpus(const std::vector<TokenList>& candidates,
                             const std::vector<TokenList>& references,
                             const std::vector<std::string>& languages,
                             const RougeLOptions& rouge_opts) {
  if (candidates.size() != references.size()) {
    throw LengthMismatch("evaluate_corpus: " + std::to_string(candidates.size()) +
                         " candidates vs " + std::to_string(references.size()) +
                         " references");
  }
  if (!languages.empty() && languages.size() != candidates.size()) {
    throw LengthMismatch("evaluate_corpus: language list length mismatch");
  }

  MetricReport report;
  auto add = [](MetricRow& row, const MetricRow& example) {
    row.bleus4 += example.bleus4;
    row.rouge1 += example.rouge1;
    row.rouge2 += example.rouge2;
    row.rougeL += example.rougeL;
    row.examples += 1;
  };
  auto finish = [](MetricRow& row) {
    if (row.examples == 0) return;
    double n = static_cast<double>(row.examples);
    row.bleus4 /= n;
    row.rouge1 /= n;
    row.rouge2 /= n;
    row.rougeL /= n;
  };

  for (size_t i = 0; i < candidates.size(); ++i) {
    MetricRow row;
    row.bleus4 = bleus4(candidates[i], references[i]);
    row.rouge1 = rouge_n(candidates[i], references[i], 1);
    row.rouge2 = rouge_n(candidates[i], references[i], 2);
    row.rougeL = rouge_l(candidates[i], references[i], rouge_opts);
    row.examples = 1;
    report.per_example.push_back(row);
    add(report.overall, row);
    if (!languages.empty()) add(report.by_language[languages[i]], row);
  }
  finish(report.overall);
  for (auto& [lang, row] : report.by_language) finish(row);
  return report;
}

}  // namespace titlegen
