#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace titlegen {

/// Anything that can score the next token given an already generated prefix.
/// Decoding is written against this interface so search behavior can be
/// tested with hand-built distribution tables.
struct StepScorer {
  virtual ~StepScorer() = default;
  virtual int64_t extended_size() const = 0;
  virtual std::string token_of(int64_t ext_id) const = 0;
  /// log P(next = id | prefix) for every extended id.
  virtual std::vector<double> next_log_probs(
      const std::vector<int64_t>& prefix_ext_ids) = 0;
};

/// Partial or finished decoded title. ext_ids/tokens include the terminating
/// EOS when the hypothesis finished by emitting it.
struct Hypothesis {
  std::vector<int64_t> ext_ids;
  std::vector<std::string> tokens;
  double log_prob = 0.0;
  bool finished = false;

  double normalized_score(bool length_normalize) const {
    if (!length_normalize || ext_ids.empty()) return log_prob;
    return log_prob / static_cast<double>(ext_ids.size());
  }
  /// Tokens with the trailing EOS stripped.
  std::vector<std::string> surface_tokens(int64_t eos_id) const;
};

struct DecodeOptions {
  size_t max_len = 25;  // cap on generated non-EOS tokens
  int64_t eos_id = 5;
  std::vector<int64_t> banned_ids;  // never generated (PAD/CLS/SEP/SOS, UNK)
  bool length_normalize = true;
};

/// Argmax decoding; ties break toward the lower extended id.
Hypothesis greedy_decode(StepScorer& scorer, const DecodeOptions& opts);

/// Standard beam search over the extended vocabulary. Hypotheses that emit
/// EOS are held aside; the result is ranked by length-normalized log
/// probability (plain log probability when length_normalize is off) and
/// holds at most `beam` entries.
std::vector<Hypothesis> beam_decode(StepScorer& scorer, size_t beam,
                                    const DecodeOptions& opts);

}  // namespace titlegen
