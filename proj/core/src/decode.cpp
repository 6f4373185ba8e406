#include "titlegen/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "titlegen/errors.hpp"

namespace titlegen {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void apply_bans(std::vector<double>& log_probs, const DecodeOptions& opts) {
  for (int64_t id : opts.banned_ids) {
    if (id >= 0 && id < static_cast<int64_t>(log_probs.size())) {
      log_probs[static_cast<size_t>(id)] = kNegInf;
    }
  }
}

int64_t argmax_lowest_tie(const std::vector<double>& values) {
  int64_t best = 0;
  for (int64_t i = 1; i < static_cast<int64_t>(values.size()); ++i) {
    if (values[static_cast<size_t>(i)] > values[static_cast<size_t>(best)]) best = i;
  }
  return best;
}

}  // namespace

std::vector<std::string> Hypothesis::surface_tokens(int64_t eos_id) const {
  std::vector<std::string> out = tokens;
  if (!ext_ids.empty() && ext_ids.back() == eos_id && !out.empty()) out.pop_back();
  return out;
}

Hypothesis greedy_decode(StepScorer& scorer, const DecodeOptions& opts) {
  Hypothesis hyp;
  while (true) {
    std::vector<double> log_probs = scorer.next_log_probs(hyp.ext_ids);
    apply_bans(log_probs, opts);
    int64_t best = argmax_lowest_tie(log_probs);
    if (log_probs[static_cast<size_t>(best)] == kNegInf) {
      hyp.finished = true;  // everything banned; nothing generable
      break;
    }
    hyp.ext_ids.push_back(best);
    hyp.tokens.push_back(scorer.token_of(best));
    hyp.log_prob += log_probs[static_cast<size_t>(best)];
    if (best == opts.eos_id) {
      hyp.finished = true;
      break;
    }
    if (hyp.ext_ids.size() >= opts.max_len) {
      hyp.finished = true;  // length cap
      break;
    }
  }
  return hyp;
}

namespace {

struct Candidate {
  size_t parent;
  int64_t ext_id;
  double score;
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.ext_id != b.ext_id) return a.ext_id < b.ext_id;
  return a.parent < b.parent;
}

}  // namespace

std::vector<Hypothesis> beam_decode(StepScorer& scorer, size_t beam,
                                    const DecodeOptions& opts) {
  if (beam == 0) throw Error("beam_decode: beam must be >= 1");

  std::vector<Hypothesis> live(1);
  std::vector<Hypothesis> finished;

  while (!live.empty()) {
    std::vector<Candidate> candidates;
    candidates.reserve(live.size() * beam);
    for (size_t p = 0; p < live.size(); ++p) {
      std::vector<double> log_probs = scorer.next_log_probs(live[p].ext_ids);
      apply_bans(log_probs, opts);
      // Top `beam` expansions of this hypothesis suffice for the global top.
      std::vector<Candidate> local;
      local.reserve(log_probs.size());
      for (int64_t id = 0; id < static_cast<int64_t>(log_probs.size()); ++id) {
        double lp = log_probs[static_cast<size_t>(id)];
        if (lp == kNegInf) continue;
        local.push_back({p, id, live[p].log_prob + lp});
      }
      size_t keep = std::min(beam, local.size());
      std::partial_sort(local.begin(), local.begin() + keep, local.end(),
                        candidate_before);
      local.resize(keep);
      candidates.insert(candidates.end(), local.begin(), local.end());
    }
    if (candidates.empty()) break;

    std::sort(candidates.begin(), candidates.end(), candidate_before);
    size_t take = std::min(beam, candidates.size());

    std::vector<Hypothesis> next_live;
    for (size_t c = 0; c < take; ++c) {
      const Candidate& cand = candidates[c];
      Hypothesis hyp = live[cand.parent];
      hyp.ext_ids.push_back(cand.ext_id);
      hyp.tokens.push_back(scorer.token_of(cand.ext_id));
      hyp.log_prob = cand.score;
      if (cand.ext_id == opts.eos_id || hyp.ext_ids.size() >= opts.max_len) {
        hyp.finished = true;  // EOS or length cap
        finished.push_back(std::move(hyp));
      } else {
        next_live.push_back(std::move(hyp));
      }
    }
    live = std::move(next_live);
  }

  std::sort(finished.begin(), finished.end(),
            [&opts](const Hypothesis& a, const Hypothesis& b) {
              double sa = a.normalized_score(opts.length_normalize);
              double sb = b.normalized_score(opts.length_normalize);
              if (sa != sb) return sa > sb;
              return a.ext_ids < b.ext_ids;
            });
  if (finished.size() > beam) finished.resize(beam);
  return finished;
}

}  // namespace titlegen
