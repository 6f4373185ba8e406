#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace titlegen {

using TokenList = std::vector<std::string>;

/// Smoothed BLEU-4: modified n-gram precisions p_1..p_4 where hit and total
/// counts get +1 for n >= 2, geometric mean, multiplied by the brevity
/// penalty (1 when the candidate is longer than the reference, else
/// exp(1 - l_r/l_c)). Empty candidate scores 0 by convention.
double bleus4(const TokenList& candidate, const TokenList& reference);

/// N-gram recall: clipped candidate/reference overlap divided by the total
/// reference n-gram count (0 when the reference has fewer than n tokens).
/// Throws EmptyReference.
double rouge_n(const TokenList& candidate, const TokenList& reference, size_t n);

/// Length of the longest common subsequence.
size_t lcs_length(const TokenList& a, const TokenList& b);

struct RougeLOptions {
  /// Use the F-measure without the factor of 2 (identical sequences then
  /// score 0.5 instead of 1).
  bool strict_printed_form = false;
};

/// LCS-based F-measure: R = LCS/len(reference), P = LCS/len(candidate),
/// F = 2RP/(R+P); 0 when there is no common subsequence. Throws EmptyInput
/// when the reference is empty; an empty candidate scores 0 by convention.
double rouge_l(const TokenList& candidate, const TokenList& reference,
               const RougeLOptions& opts = {});

struct MetricRow {
  double bleus4 = 0;
  double rouge1 = 0;
  double rouge2 = 0;
  double rougeL = 0;
  size_t examples = 0;
};

struct MetricReport {
  MetricRow overall;
  std::map<std::string, MetricRow> by_language;
  std::vector<MetricRow> per_example;
};

/// Unweighted mean of per-example scores, overall and per language tag.
/// languages may be empty (single group) or aligned with the pairs.
/// Throws LengthMismatch on ragged inputs.
MetricReport evaluate_corpus(const std::vector<TokenList>& candidates,
                             const std::vector<TokenList>& references,
                             const std::vector<std::string>& languages = {},
                             const RougeLOptions& rouge_opts = {});

}  // namespace titlegen
