#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace titlegen {

/// Lowercases and splits a string into tokens. Every character that is
/// neither alphanumeric nor whitespace becomes a token of its own; runs of
/// alphanumerics stay together; whitespace only separates. ASCII letters are
/// lowercased; non-ASCII codepoints are classified by a compact table of
/// common punctuation/whitespace ranges and kept verbatim otherwise.
std::vector<std::string> tokenize(std::string_view text);

/// Token <-> id bijection with six reserved specials at the lowest ids.
class Vocabulary {
 public:
  static constexpr int64_t kPad = 0;
  static constexpr int64_t kUnk = 1;
  static constexpr int64_t kCls = 2;
  static constexpr int64_t kSep = 3;
  static constexpr int64_t kSos = 4;
  static constexpr int64_t kEos = 5;
  static constexpr size_t kNumSpecials = 6;

  static const std::array<std::string, kNumSpecials>& specials();

  /// Vocabulary holding only the special tokens.
  Vocabulary();

  /// Counts tokens across the streams, ranks by (count desc, token asc) and
  /// keeps at most max_size non-special entries with count >= min_count (the
  /// six specials come on top). Stream tokens colliding with a special
  /// surface are skipped.
  static Vocabulary build(const std::vector<std::vector<std::string>>& streams,
                          size_t max_size, size_t min_count = 1);

  /// Id for a token, kUnk when absent.
  int64_t id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token_of(int64_t id) const;
  int64_t size() const { return static_cast<int64_t>(id_to_token_.size()); }

  /// One token per line, line number == id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  /// FNV-1a over the serialized token list.
  uint64_t content_hash() const;

 private:
  void push_token(std::string token);
  std::unordered_map<std::string, int64_t> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// Surface tokens plus their vocabulary ids (OOV -> kUnk). Surface strings
/// are kept verbatim for the copy layer.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<int64_t> ids;

  size_t size() const { return tokens.size(); }
};

/// Wraps tokens as [CLS] ... [SEP]. Throws SequenceTooLong when the wrapped
/// length exceeds max_len (0 disables the check).
TokenSequence encode_wrapped_source(const std::vector<std::string>& tokens,
                                    const Vocabulary& vocab, size_t max_len = 0);

/// Wraps tokens as [SOS] ... [EOS].
TokenSequence encode_wrapped_target(const std::vector<std::string>& tokens,
                                    const Vocabulary& vocab, size_t max_len = 0);

/// Ids -> surface tokens; inverse of encoding for in-vocabulary tokens.
std::vector<std::string> decode_ids(const std::vector<int64_t>& ids,
                                    const Vocabulary& vocab);

}  // namespace titlegen
