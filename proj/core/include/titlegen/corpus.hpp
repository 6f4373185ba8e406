#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "titlegen/tokenizer.hpp"

namespace titlegen {

/// One Stack Overflow style Q&A post.
struct QuestionPost {
  int64_t id = 0;
  int64_t creation_epoch_s = 0;  // UTC
  std::string title;
  std::string body_markup;  // HTML-like, code wrapped in <code></code>
  std::vector<std::string> tags;
  int score = 0;
  bool has_accepted_answer = false;
  bool is_closed = false;
};

enum class SegmentKind { text, code };

struct Segment {
  SegmentKind kind;
  std::string content;
};

/// Ordered text/code decomposition of a post body.
struct SegmentedBody {
  std::vector<Segment> segments;

  /// Re-inserts <code></code> markers; inverse of parse_body for bodies
  /// without empty code blocks.
  std::string serialize() const;

  bool has_text() const;
  bool has_code() const;
  std::vector<std::string> text_tokens() const;
  std::vector<std::string> code_tokens() const;
  /// All tokens in document order (text and code interleaved).
  std::vector<std::string> all_tokens() const;
};

/// Splits markup at <code></code> boundaries. Code segments exclude the tag
/// markers. Empty segments are dropped. Throws MalformedMarkup (with the
/// byte offset) on an unmatched close tag, a nested open tag, or an
/// unterminated code block.
SegmentedBody parse_body(std::string_view body_markup);

struct FilterConfig {
  int min_score = 2;  // "more than one vote"
  bool require_accepted = true;
  bool require_open = true;
  std::set<std::string> allowed_tags = {"java", "python", "javascript", "php"};
  std::set<std::string> excluded_tags = {"c#", "html", "c++"};
  bool require_bimodal = true;
  bool interrogative_constraint = true;
  size_t max_body_tokens = 1000;
  size_t max_title_tokens = 25;
  bool code_only = false;  // source sequences use code segments only
};

/// Constraint order doubles as the audit order: the first failed constraint
/// is the reported rejection reason.
enum class RejectionReason {
  none,
  open,
  accepted,
  score,
  tags,
  bimodal,
  interrogative,
  body_length,
  title_length,
};

std::string_view to_string(RejectionReason r);

struct FilterResult {
  bool pass;
  RejectionReason reason;
};

extern const std::vector<std::string> kInterrogativeKeywords;

/// True when the tokenized title contains one of how/what/why/which/when.
bool title_is_interrogative(const std::string& title);

FilterResult passes_quality_filter(const QuestionPost& post, const FilterConfig& cfg);

/// Time-wise partition; lists hold post ids.
struct DatasetSplit {
  std::vector<int64_t> train;
  std::vector<int64_t> validation;
  std::vector<int64_t> test;
  // Boundary timestamps (max creation date inside each earlier bucket).
  std::optional<int64_t> train_end_epoch_s;
  std::optional<int64_t> validation_end_epoch_s;
};

/// Sorts by (creation_date, id) ascending and takes the newest test_count
/// posts for test, the next newest validation_count for validation, and the
/// rest (or exactly train_count when given) for train. Ties on identical
/// timestamps break toward the lower id staying in the earlier bucket.
/// Throws InsufficientData when the requested counts exceed the corpus.
DatasetSplit split_chronological(const std::vector<QuestionPost>& posts,
                                 size_t validation_count, size_t test_count,
                                 std::optional<size_t> train_count = std::nullopt);

/// |unique(title) n unique(body)| / |unique(title)|, or multiset overlap
/// divided by the title token count when multiset=true. Throws EmptyTitle.
double overlap_ratio(const std::vector<std::string>& title_tokens,
                     const std::vector<std::string>& body_tokens,
                     bool multiset = false);

struct Quartiles {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct YearStats {
  int year = 0;
  size_t posts = 0;
  double frac_with_text = 0;
  double frac_with_code = 0;
  double mean_overlap_title_text = 0;  // over posts with a nonempty text part
  double mean_overlap_title_code = 0;  // over posts with a nonempty code part
};

struct StatsReport {
  size_t posts = 0;
  std::vector<YearStats> by_year;  // ascending year
  Quartiles body_len, text_len, code_len;
  double frac_body_over_200 = 0;
};

/// Figs. 1-3 style statistics over parsed posts.
StatsReport corpus_stats(const std::vector<QuestionPost>& posts);

/// Linear-interpolation quartiles of an unsorted sample.
Quartiles compute_quartiles(std::vector<double> values);

/// Body tokens wrapped as [CLS] ... [SEP]; code_only keeps only code
/// segments. Throws SequenceTooLong past max_len (0 disables the check).
TokenSequence encode_source(const SegmentedBody& body, const Vocabulary& vocab,
                            bool code_only = false, size_t max_len = 0);

/// Tokenized title wrapped as [SOS] ... [EOS].
TokenSequence encode_target(const std::string& title, const Vocabulary& vocab,
                            size_t max_len = 0);

}  // namespace titlegen
