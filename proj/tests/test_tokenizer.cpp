#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>

#include "titlegen/errors.hpp"
#include "titlegen/tokenizer.hpp"
#include "titlegen/util.hpp"

using namespace titlegen;

TEST_CASE("tokenize isolates punctuation and lowercases") {
  CHECK(tokenize("mesh.getPoints().addAll") ==
        std::vector<std::string>{"mesh", ".", "getpoints", "(", ")", ".", "addall"});
  CHECK(tokenize("x=1") == std::vector<std::string>{"x", "=", "1"});
  CHECK(tokenize("How to create such shape?") ==
        std::vector<std::string>{"how", "to", "create", "such", "shape", "?"});
}

TEST_CASE("tokenize edge cases") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n ").empty());
  CHECK(tokenize("abc123") == std::vector<std::string>{"abc123"});
  CHECK(tokenize("a--b") == std::vector<std::string>{"a", "-", "-", "b"});
  // Unicode: letters pass through, punctuation splits, NBSP separates.
  CHECK(tokenize("café —ok") ==
        std::vector<std::string>{"café", "—", "ok"});
  CHECK(tokenize("a b") == std::vector<std::string>{"a", "b"});
}

namespace {

std::vector<std::string> random_strings(std::mt19937_64& rng, size_t n) {
  static const std::string alphabet =
      "abcXYZ019 .,;:!?()[]{}<>=+-*/\\\"'\t\n_#@$%^&|~`";
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    std::string s;
    size_t len = rng() % 40;
    for (size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    if (rng() % 4 == 0) s += "café… 中";
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize is a fixpoint under re-tokenization") {
  std::mt19937_64 rng(7);
  for (const auto& s : random_strings(rng, 200)) {
    auto once = tokenize(s);
    auto again = tokenize(join(once, " "));
    CHECK(again == once);
  }
}

TEST_CASE("tokens never mix alphanumerics and punctuation") {
  std::mt19937_64 rng(8);
  auto is_ascii_punct = [](char c) {
    return !std::isalnum(static_cast<unsigned char>(c)) &&
           !std::isspace(static_cast<unsigned char>(c));
  };
  for (const auto& s : random_strings(rng, 200)) {
    for (const auto& tok : tokenize(s)) {
      REQUIRE(!tok.empty());
      bool has_alnum = false, has_punct = false;
      for (char c : tok) {
        if (static_cast<unsigned char>(c) >= 0x80) continue;  // multibyte
        if (std::isalnum(static_cast<unsigned char>(c))) has_alnum = true;
        if (is_ascii_punct(c)) has_punct = true;
      }
      CHECK(!(has_alnum && has_punct));
    }
  }
}

TEST_CASE("vocabulary ranks by count then token") {
  Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 7, 1);
  CHECK(v.size() == 8);  // 6 specials + a + b
  CHECK(v.id_of("a") == 6);
  CHECK(v.id_of("b") == 7);

  // count ties break lexicographically
  Vocabulary tied = Vocabulary::build({{"b", "a"}}, 10, 1);
  CHECK(tied.id_of("a") == 6);
  CHECK(tied.id_of("b") == 7);
}

TEST_CASE("vocabulary respects max_size and min_count") {
  // max_size caps the non-special entries; specials always come on top
  Vocabulary capped = Vocabulary::build({{"a", "a", "b", "c"}}, 2, 1);
  CHECK(capped.size() == 8);
  CHECK(capped.contains("a"));
  CHECK(capped.contains("b"));
  CHECK(!capped.contains("c"));

  Vocabulary filtered = Vocabulary::build({{"a", "a", "b"}}, 100, 2);
  CHECK(filtered.contains("a"));
  CHECK(!filtered.contains("b"));
}

TEST_CASE("vocabulary matches an independent count-sort oracle") {
  // 10k-token synthetic stream.
  std::mt19937_64 rng(99);
  std::vector<std::string> pool;
  for (int i = 0; i < 120; ++i) pool.push_back("tok" + std::to_string(i));
  std::vector<std::string> stream;
  for (int i = 0; i < 10000; ++i) stream.push_back(pool[rng() % pool.size()]);

  // oracle: hash-count then stable sort on (count desc, token asc)
  std::map<std::string, int> counts;
  for (const auto& t : stream) counts[t] += 1;
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v = Vocabulary::build({stream}, 50, 1);
  REQUIRE(v.size() == 56);
  for (size_t i = 0; i < 50; ++i) {
    CHECK(v.token_of(static_cast<int64_t>(6 + i)) == ranked[i].first);
  }
}

TEST_CASE("vocabulary bijection and persistence") {
  Vocabulary v = Vocabulary::build({{"x", "y", "x"}}, 64, 1);
  for (int64_t id = 0; id < v.size(); ++id) {
    CHECK(v.id_of(v.token_of(id)) == id);
  }

  auto path = std::filesystem::temp_directory_path() / "titlegen_vocab_test.txt";
  v.save(path.string());
  Vocabulary loaded = Vocabulary::load(path.string());
  CHECK(loaded.size() == v.size());
  CHECK(loaded.content_hash() == v.content_hash());
  for (int64_t id = 0; id < v.size(); ++id) {
    CHECK(loaded.token_of(id) == v.token_of(id));
  }
  std::filesystem::remove(path);
}

TEST_CASE("specials occupy the lowest ids in fixed order") {
  Vocabulary v;
  CHECK(v.token_of(Vocabulary::kPad) == "<pad>");
  CHECK(v.token_of(Vocabulary::kUnk) == "<unk>");
  CHECK(v.token_of(Vocabulary::kCls) == "<cls>");
  CHECK(v.token_of(Vocabulary::kSep) == "<sep>");
  CHECK(v.token_of(Vocabulary::kSos) == "<sos>");
  CHECK(v.token_of(Vocabulary::kEos) == "<eos>");
}

TEST_CASE("encode wraps sequences and maps OOV to UNK keeping surfaces") {
  Vocabulary v = Vocabulary::build({{"how", "to"}}, 64, 1);

  TokenSequence empty = encode_wrapped_source({}, v);
  CHECK(empty.ids == std::vector<int64_t>{Vocabulary::kCls, Vocabulary::kSep});

  TokenSequence target = encode_wrapped_target({"how", "to", "x"}, v);
  CHECK(target.ids == std::vector<int64_t>{Vocabulary::kSos, v.id_of("how"),
                                           v.id_of("to"), Vocabulary::kUnk,
                                           Vocabulary::kEos});
  CHECK(target.tokens[3] == "x");  // surface kept for the copy layer

  CHECK_THROWS_AS(encode_wrapped_source({"how", "to", "x"}, v, 4), SequenceTooLong);
}

TEST_CASE("encode/decode round trip on in-vocabulary tokens") {
  Vocabulary v = Vocabulary::build({{"how", "to", "sort", "a", "list"}}, 64, 1);
  std::vector<std::string> tokens = {"how", "to", "sort", "a", "list"};
  TokenSequence seq = encode_wrapped_target(tokens, v);
  auto decoded = decode_ids(seq.ids, v);
  CHECK(decoded.front() == "<sos>");
  CHECK(decoded.back() == "<eos>");
  CHECK(std::vector<std::string>(decoded.begin() + 1, decoded.end() - 1) == tokens);
}
