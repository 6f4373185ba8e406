#include "titlegen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "titlegen/errors.hpp"
#include "titlegen/tokenizer.hpp"
#include "titlegen/util.hpp"

namespace titlegen {

namespace {
constexpr std::string_view kOpenTag = "<code>";
constexpr std::string_view kCloseTag = "</code>";
}  // namespace

std::string SegmentedBody::serialize() const {
  std::string out;
  for (const auto& seg : segments) {
    if (seg.kind == SegmentKind::code) {
      out += kOpenTag;
      out += seg.content;
      out += kCloseTag;
    } else {
      out += seg.content;
    }
  }
  return out;
}

bool SegmentedBody::has_text() const {
  for (const auto& seg : segments) {
    if (seg.kind == SegmentKind::text && !tokenize(seg.content).empty()) return true;
  }
  return false;
}

bool SegmentedBody::has_code() const {
  for (const auto& seg : segments) {
    if (seg.kind == SegmentKind::code && !tokenize(seg.content).empty()) return true;
  }
  return false;
}

namespace {
std::vector<std::string> collect_tokens(const SegmentedBody& body,
                                        std::optional<SegmentKind> only) {
  std::vector<std::string> out;
  for (const auto& seg : body.segments) {
    if (only && seg.kind != *only) continue;
    auto toks = tokenize(seg.content);
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}
}  // namespace

std::vector<std::string> SegmentedBody::text_tokens() const {
  return collect_tokens(*this, SegmentKind::text);
}
std::vector<std::string> SegmentedBody::code_tokens() const {
  return collect_tokens(*this, SegmentKind::code);
}
std::vector<std::string> SegmentedBody::all_tokens() const {
  return collect_tokens(*this, std::nullopt);
}

SegmentedBody parse_body(std::string_view markup) {
  SegmentedBody body;
  size_t pos = 0;
  bool in_code = false;
  size_t open_offset = 0;
  std::string current;

  auto flush = [&](SegmentKind kind) {
    if (!current.empty()) {
      body.segments.push_back({kind, std::move(current)});
      current.clear();
    }
  };

  while (pos < markup.size()) {
    if (markup.compare(pos, kOpenTag.size(), kOpenTag) == 0) {
      if (in_code) {
        throw MalformedMarkup("nested <code> tag", pos);
      }
      flush(SegmentKind::text);
      in_code = true;
      open_offset = pos;
      pos += kOpenTag.size();
    } else if (markup.compare(pos, kCloseTag.size(), kCloseTag) == 0) {
      if (!in_code) {
        throw MalformedMarkup("unmatched </code> tag", pos);
      }
      flush(SegmentKind::code);
      in_code = false;
      pos += kCloseTag.size();
    } else {
      current += markup[pos];
      ++pos;
    }
  }
  if (in_code) {
    throw MalformedMarkup("unterminated <code> tag", open_offset);
  }
  flush(SegmentKind::text);
  return body;
}

std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::none: return "-";
    case RejectionReason::open: return "open";
    case RejectionReason::accepted: return "accepted";
    case RejectionReason::score: return "score";
    case RejectionReason::tags: return "tags";
    case RejectionReason::bimodal: return "bimodal";
    case RejectionReason::interrogative: return "interrogative";
    case RejectionReason::body_length: return "body_length";
    case RejectionReason::title_length: return "title_length";
  }
  return "?";
}

const std::vector<std::string> kInterrogativeKeywords = {"how", "what", "why",
                                                         "which", "when"};

bool title_is_interrogative(const std::string& title) {
  for (const auto& tok : tokenize(title)) {
    for (const auto& kw : kInterrogativeKeywords) {
      if (tok == kw) return true;
    }
  }
  return false;
}

FilterResult passes_quality_filter(const QuestionPost& post, const FilterConfig& cfg) {
  if (cfg.require_open && post.is_closed) {
    return {false, RejectionReason::open};
  }
  if (cfg.require_accepted && !post.has_accepted_answer) {
    return {false, RejectionReason::accepted};
  }
  if (post.score < cfg.min_score) {
    return {false, RejectionReason::score};
  }
  if (!cfg.allowed_tags.empty()) {
    bool any_allowed = false;
    for (const auto& t : post.tags) {
      if (cfg.allowed_tags.count(t)) {
        any_allowed = true;
        break;
      }
    }
    if (!any_allowed) return {false, RejectionReason::tags};
  }
  // An excluded tag rejects even when an allowed tag co-occurs.
  for (const auto& t : post.tags) {
    if (cfg.excluded_tags.count(t)) return {false, RejectionReason::tags};
  }

  SegmentedBody body = parse_body(post.body_markup);
  if (cfg.require_bimodal && (!body.has_text() || !body.has_code())) {
    return {false, RejectionReason::bimodal};
  }
  if (cfg.interrogative_constraint && !title_is_interrogative(post.title)) {
    return {false, RejectionReason::interrogative};
  }
  if (body.all_tokens().size() > cfg.max_body_tokens) {
    return {false, RejectionReason::body_length};
  }
  if (tokenize(post.title).size() > cfg.max_title_tokens) {
    return {false, RejectionReason::title_length};
  }
  return {true, RejectionReason::none};
}

DatasetSplit split_chronological(const std::vector<QuestionPost>& posts,
                                 size_t validation_count, size_t test_count,
                                 std::optional<size_t> train_count) {
  struct Key {
    int64_t date;
    int64_t id;
  };
  std::vector<Key> keys;
  keys.reserve(posts.size());
  for (const auto& p : posts) keys.push_back({p.creation_epoch_s, p.id});
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.date != b.date) return a.date < b.date;
    return a.id < b.id;
  });

  size_t n = keys.size();
  size_t wanted_train = train_count.value_or(
      n >= validation_count + test_count ? n - validation_count - test_count : n + 1);
  if (wanted_train + validation_count + test_count > n) {
    throw InsufficientData("requested split sizes exceed corpus size " +
                           std::to_string(n));
  }

  DatasetSplit split;
  size_t val_begin = n - test_count - validation_count;
  size_t test_begin = n - test_count;
  // When train_count < val_begin the newest train candidates are dropped so
  // the chronological ordering against validation/test still holds.
  for (size_t i = 0; i < wanted_train; ++i) split.train.push_back(keys[i].id);
  for (size_t i = val_begin; i < test_begin; ++i) split.validation.push_back(keys[i].id);
  for (size_t i = test_begin; i < n; ++i) split.test.push_back(keys[i].id);
  if (wanted_train > 0) split.train_end_epoch_s = keys[wanted_train - 1].date;
  if (validation_count > 0) split.validation_end_epoch_s = keys[test_begin - 1].date;
  return split;
}

double overlap_ratio(const std::vector<std::string>& title_tokens,
                     const std::vector<std::string>& body_tokens, bool multiset) {
  if (title_tokens.empty()) throw EmptyTitle("overlap_ratio: empty title");
  if (multiset) {
    std::unordered_map<std::string, size_t> title_counts, body_counts;
    for (const auto& t : title_tokens) title_counts[t] += 1;
    for (const auto& t : body_tokens) body_counts[t] += 1;
    size_t hit = 0;
    for (const auto& [tok, c] : title_counts) {
      auto it = body_counts.find(tok);
      if (it != body_counts.end()) hit += std::min(c, it->second);
    }
    return static_cast<double>(hit) / static_cast<double>(title_tokens.size());
  }
  std::unordered_set<std::string> title_set(title_tokens.begin(), title_tokens.end());
  std::unordered_set<std::string> body_set(body_tokens.begin(), body_tokens.end());
  size_t hit = 0;
  for (const auto& t : title_set) {
    if (body_set.count(t)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(title_set.size());
}

Quartiles compute_quartiles(std::vector<double> values) {
  Quartiles q;
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    double idx = p * static_cast<double>(values.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(idx));
    size_t hi = static_cast<size_t>(std::ceil(idx));
    double frac = idx - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  q.min = values.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = values.back();
  return q;
}

TokenSequence encode_source(const SegmentedBody& body, const Vocabulary& vocab,
                            bool code_only, size_t max_len) {
  return encode_wrapped_source(code_only ? body.code_tokens() : body.all_tokens(),
                               vocab, max_len);
}

TokenSequence encode_target(const std::string& title, const Vocabulary& vocab,
                            size_t max_len) {
  return encode_wrapped_target(tokenize(title), vocab, max_len);
}

StatsReport corpus_stats(const std::vector<QuestionPost>& posts) {
  StatsReport report;
  report.posts = posts.size();

  struct YearAccum {
    size_t posts = 0, with_text = 0, with_code = 0;
    double overlap_text_sum = 0, overlap_code_sum = 0;
    size_t overlap_text_n = 0, overlap_code_n = 0;
  };
  std::map<int, YearAccum> years;
  std::vector<double> body_lens, text_lens, code_lens;
  size_t over_200 = 0;

  for (const auto& post : posts) {
    SegmentedBody body = parse_body(post.body_markup);
    auto title = tokenize(post.title);
    auto text = body.text_tokens();
    auto code = body.code_tokens();
    size_t body_len = text.size() + code.size();

    auto& y = years[utc_year(post.creation_epoch_s)];
    y.posts += 1;
    if (!text.empty()) y.with_text += 1;
    if (!code.empty()) y.with_code += 1;
    if (!title.empty() && !text.empty()) {
      y.overlap_text_sum += overlap_ratio(title, text);
      y.overlap_text_n += 1;
    }
    if (!title.empty() && !code.empty()) {
      y.overlap_code_sum += overlap_ratio(title, code);
      y.overlap_code_n += 1;
    }

    body_lens.push_back(static_cast<double>(body_len));
    text_lens.push_back(static_cast<double>(text.size()));
    code_lens.push_back(static_cast<double>(code.size()));
    if (body_len > 200) over_200 += 1;
  }

  for (const auto& [year, acc] : years) {
    YearStats ys;
    ys.year = year;
    ys.posts = acc.posts;
    ys.frac_with_text = static_cast<double>(acc.with_text) / acc.posts;
    ys.frac_with_code = static_cast<double>(acc.with_code) / acc.posts;
    ys.mean_overlap_title_text =
        acc.overlap_text_n ? acc.overlap_text_sum / acc.overlap_text_n : 0.0;
    ys.mean_overlap_title_code =
        acc.overlap_code_n ? acc.overlap_code_sum / acc.overlap_code_n : 0.0;
    report.by_year.push_back(ys);
  }
  report.body_len = compute_quartiles(body_lens);
  report.text_len = compute_quartiles(text_lens);
  report.code_len = compute_quartiles(code_lens);
  report.frac_body_over_200 =
      posts.empty() ? 0.0 : static_cast<double>(over_200) / posts.size();
  return report;
}

}  // namespace titlegen
