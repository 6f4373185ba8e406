#include "titlegen/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "titlegen/errors.hpp"
#include "titlegen/util.hpp"

namespace titlegen {

namespace {

enum class CharClass { alnum, space, punct };

bool is_unicode_space(uint32_t cp) {
  if (cp == 0x00A0 || cp == 0x1680 || cp == 0x2028 || cp == 0x2029 ||
      cp == 0x202F || cp == 0x205F || cp == 0x3000)
    return true;
  return cp >= 0x2000 && cp <= 0x200A;
}

bool is_unicode_punct(uint32_t cp) {
  // Latin-1 symbol block plus the common punctuation ranges; everything else
  // outside ASCII is treated as alphanumeric.
  if (cp >= 0x00A1 && cp <= 0x00BF) return true;
  if (cp == 0x00D7 || cp == 0x00F7) return true;
  if (cp >= 0x2010 && cp <= 0x205E && !is_unicode_space(cp)) return true;
  if (cp >= 0x2190 && cp <= 0x2BFF) return true;  // arrows, math, box drawing
  if (cp >= 0x3001 && cp <= 0x303F) return true;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  return false;
}

CharClass classify(uint32_t cp) {
  if (cp < 0x80) {
    if (std::isalnum(static_cast<int>(cp))) return CharClass::alnum;
    if (std::isspace(static_cast<int>(cp))) return CharClass::space;
    return CharClass::punct;
  }
  if (is_unicode_space(cp)) return CharClass::space;
  if (is_unicode_punct(cp)) return CharClass::punct;
  return CharClass::alnum;
}

// Decodes one UTF-8 codepoint starting at i; on malformed input consumes a
// single byte and reports it as a punctuation codepoint.
std::pair<uint32_t, size_t> next_codepoint(std::string_view s, size_t i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return {c, 1};
  size_t len = 0;
  uint32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (i + len > s.size()) return {0xFFFD, 1};
  for (size_t k = 1; k < len; ++k) {
    unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (cc & 0x3F);
  }
  return {cp, len};
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  size_t i = 0;
  while (i < text.size()) {
    auto [cp, len] = next_codepoint(text, i);
    CharClass cls = (len == 1 && static_cast<unsigned char>(text[i]) >= 0x80)
                        ? CharClass::punct
                        : classify(cp);
    switch (cls) {
      case CharClass::space:
        flush();
        break;
      case CharClass::punct:
        flush();
        out.emplace_back(text.substr(i, len));
        break;
      case CharClass::alnum:
        if (cp < 0x80 && cp >= 'A' && cp <= 'Z') {
          current += static_cast<char>(cp - 'A' + 'a');
        } else {
          current.append(text.substr(i, len));
        }
        break;
    }
    i += len;
  }
  flush();
  return out;
}

const std::array<std::string, Vocabulary::kNumSpecials>& Vocabulary::specials() {
  static const std::array<std::string, kNumSpecials> s = {
      "<pad>", "<unk>", "<cls>", "<sep>", "<sos>", "<eos>"};
  return s;
}

Vocabulary::Vocabulary() {
  for (const auto& t : specials()) push_token(t);
}

void Vocabulary::push_token(std::string token) {
  int64_t id = static_cast<int64_t>(id_to_token_.size());
  token_to_id_.emplace(token, id);
  id_to_token_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& streams,
                             size_t max_size, size_t min_count) {
  if (max_size == 0) {
    throw Error("vocabulary max_size must be positive");
  }
  std::unordered_map<std::string, uint64_t> counts;
  for (const auto& stream : streams) {
    for (const auto& tok : stream) counts[tok] += 1;
  }
  for (const auto& s : specials()) counts.erase(s);

  std::vector<std::pair<std::string, uint64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  for (auto& [token, count] : ranked) {
    if (count < min_count) break;
    if (vocab.id_to_token_.size() >= max_size + kNumSpecials) break;
    vocab.push_token(token);
  }
  return vocab;
}

int64_t Vocabulary::id_of(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token_of(int64_t id) const {
  if (id < 0 || id >= size()) throw Error("vocabulary id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::string out;
  for (const auto& t : id_to_token_) {
    out += t;
    out += '\n';
  }
  write_file(path, out);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::string contents = read_file(path);
  Vocabulary vocab;
  vocab.token_to_id_.clear();
  vocab.id_to_token_.clear();
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) {
    if (vocab.token_to_id_.count(line)) {
      throw IoError("duplicate token in vocabulary file: " + line);
    }
    vocab.push_token(line);
  }
  if (vocab.id_to_token_.size() < kNumSpecials) {
    throw IoError("vocabulary file too short: " + path);
  }
  for (size_t i = 0; i < kNumSpecials; ++i) {
    if (vocab.id_to_token_[i] != specials()[i]) {
      throw IoError("vocabulary file missing special tokens header: " + path);
    }
  }
  return vocab;
}

uint64_t Vocabulary::content_hash() const {
  uint64_t h = fnv1a64("");
  for (const auto& t : id_to_token_) {
    h = fnv1a64_combine(h, t);
    h = fnv1a64_combine(h, std::string_view("\n", 1));
  }
  return h;
}

namespace {

TokenSequence encode_with(const std::vector<std::string>& tokens,
                          const Vocabulary& vocab, int64_t left, int64_t right,
                          size_t max_len) {
  TokenSequence seq;
  seq.tokens.reserve(tokens.size() + 2);
  seq.ids.reserve(tokens.size() + 2);
  seq.tokens.push_back(vocab.token_of(left));
  seq.ids.push_back(left);
  for (const auto& t : tokens) {
    seq.tokens.push_back(t);
    seq.ids.push_back(vocab.id_of(t));
  }
  seq.tokens.push_back(vocab.token_of(right));
  seq.ids.push_back(right);
  if (max_len > 0 && seq.size() > max_len) {
    throw SequenceTooLong("wrapped sequence length " + std::to_string(seq.size()) +
                          " exceeds maximum " + std::to_string(max_len));
  }
  return seq;
}

}  // namespace

TokenSequence encode_wrapped_source(const std::vector<std::string>& tokens,
                                    const Vocabulary& vocab, size_t max_len) {
  return encode_with(tokens, vocab, Vocabulary::kCls, Vocabulary::kSep, max_len);
}

TokenSequence encode_wrapped_target(const std::vector<std::string>& tokens,
                                    const Vocabulary& vocab, size_t max_len) {
  return encode_with(tokens, vocab, Vocabulary::kSos, Vocabulary::kEos, max_len);
}

std::vector<std::string> decode_ids(const std::vector<int64_t>& ids,
                                    const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int64_t id : ids) out.push_back(vocab.token_of(id));
  return out;
}

}  // namespace titlegen
