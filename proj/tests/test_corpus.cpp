#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "titlegen/corpus.hpp"
#include "titlegen/errors.hpp"
#include "titlegen/tokenizer.hpp"

using namespace titlegen;

namespace {

QuestionPost good_post() {
  QuestionPost post;
  post.id = 1;
  post.creation_epoch_s = 1577836800;  // 2020-01-01
  post.title = "how to sort a map";
  post.body_markup = "sorting maps <code>map.sort()</code> fails";
  post.tags = {"java"};
  post.score = 2;
  post.has_accepted_answer = true;
  post.is_closed = false;
  return post;
}

}  // namespace

TEST_CASE("parse_body splits text and code segments") {
  SegmentedBody body = parse_body("fix <code>x=1</code> please");
  REQUIRE(body.segments.size() == 3);
  CHECK(body.segments[0].kind == SegmentKind::text);
  CHECK(body.segments[0].content == "fix ");
  CHECK(body.segments[1].kind == SegmentKind::code);
  CHECK(body.segments[1].content == "x=1");
  CHECK(body.segments[2].content == " please");

  SegmentedBody adjacent = parse_body("<code>a</code><code>b</code>");
  REQUIRE(adjacent.segments.size() == 2);
  CHECK(adjacent.segments[0].kind == SegmentKind::code);
  CHECK(adjacent.segments[1].kind == SegmentKind::code);
  CHECK(adjacent.segments[0].content == "a");
  CHECK(adjacent.segments[1].content == "b");

  SegmentedBody plain = parse_body("no code at all");
  REQUIRE(plain.segments.size() == 1);
  CHECK(plain.segments[0].kind == SegmentKind::text);
}

TEST_CASE("parse_body rejects malformed markup with a byte offset") {
  CHECK_THROWS_AS(parse_body("<code>a"), MalformedMarkup);
  CHECK_THROWS_AS(parse_body("a</code>"), MalformedMarkup);
  CHECK_THROWS_AS(parse_body("<code>a<code>b</code></code>"), MalformedMarkup);
  try {
    parse_body("xy</code>");
  } catch (const MalformedMarkup& e) {
    CHECK(e.offset == 2);
    CHECK(std::string(e.what()).find("byte offset 2") != std::string::npos);
  }
}

TEST_CASE("parse_body round trips to the original markup") {
  std::vector<std::string> bodies = {
      "fix <code>x=1</code> please",
      "<code>a</code><code>b</code>",
      "no code at all",
      "",
      "text <code>code with <b>html</b></code> tail <code>more\ncode</code>",
  };
  for (const auto& markup : bodies) {
    CHECK(parse_body(markup).serialize() == markup);
  }
  std::mt19937_64 rng(3);
  for (const auto& post : testfix::synthetic_corpus(200, 11)) {
    CHECK(parse_body(post.body_markup).serialize() == post.body_markup);
    for (const auto& seg : parse_body(post.body_markup).segments) {
      CHECK(!seg.content.empty());
    }
  }
}

TEST_CASE("quality filter accepts a conforming post") {
  FilterConfig cfg;
  auto [pass, reason] = passes_quality_filter(good_post(), cfg);
  CHECK(pass);
  CHECK(reason == RejectionReason::none);
}

TEST_CASE("quality filter rejects in documented constraint order") {
  FilterConfig cfg;

  QuestionPost post = good_post();
  post.score = 1;
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::score);

  post = good_post();
  post.title = "java month enum";  // keyword combination, no interrogative
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::interrogative);

  post = good_post();
  post.is_closed = true;
  post.score = 0;  // open is checked before score
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::open);

  post = good_post();
  post.has_accepted_answer = false;
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::accepted);

  post = good_post();
  post.tags = {"rust"};
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::tags);

  post = good_post();
  post.tags = {"java", "c++"};  // excluded tag co-occurring with an allowed one
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::tags);

  post = good_post();
  post.body_markup = "words only no code";
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::bimodal);

  post = good_post();
  post.body_markup = "<code>x=1</code>";
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::bimodal);

  post = good_post();
  cfg.max_body_tokens = 3;
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::body_length);

  cfg = FilterConfig{};
  post = good_post();
  cfg.max_title_tokens = 2;
  CHECK(passes_quality_filter(post, cfg).reason == RejectionReason::title_length);
}

TEST_CASE("interrogative matching is whole-word and case-insensitive") {
  CHECK(title_is_interrogative("How to do this"));
  CHECK(title_is_interrogative("explain WHY it fails"));
  CHECK(title_is_interrogative("which one?"));
  CHECK(!title_is_interrogative("however it works"));  // not whole-word
  CHECK(!title_is_interrogative("showcase of whatnot"));
  CHECK(title_is_interrogative("what?is!this"));  // punctuation separates
}

TEST_CASE("filtering is deterministic and idempotent") {
  auto posts = testfix::synthetic_corpus(300, 5);
  FilterConfig cfg;
  std::vector<QuestionPost> retained;
  for (const auto& p : posts) {
    if (passes_quality_filter(p, cfg).pass) retained.push_back(p);
  }
  std::vector<QuestionPost> twice;
  for (const auto& p : retained) {
    if (passes_quality_filter(p, cfg).pass) twice.push_back(p);
  }
  CHECK(twice.size() == retained.size());
  for (size_t i = 0; i < twice.size(); ++i) CHECK(twice[i].id == retained[i].id);
  CHECK(!retained.empty());
}

TEST_CASE("split takes the newest posts for test") {
  std::vector<QuestionPost> posts;
  for (int i = 0; i < 10; ++i) {
    QuestionPost p = good_post();
    p.id = i + 1;
    p.creation_epoch_s = 1000 + i * 100;
    posts.push_back(p);
  }
  DatasetSplit split = split_chronological(posts, 0, 2);
  CHECK(split.train.size() == 8);
  CHECK(split.test == std::vector<int64_t>{9, 10});
}

TEST_CASE("split breaks timestamp ties toward the lower id in train") {
  std::vector<QuestionPost> posts;
  for (int i = 0; i < 4; ++i) {
    QuestionPost p = good_post();
    p.id = i + 1;
    p.creation_epoch_s = 1000;  // all identical
    posts.push_back(p);
  }
  DatasetSplit split = split_chronological(posts, 0, 2);
  CHECK(split.train == std::vector<int64_t>{1, 2});
  CHECK(split.test == std::vector<int64_t>{3, 4});
}

TEST_CASE("split matches a brute-force pairwise-date oracle") {
  auto posts = testfix::synthetic_corpus(100, 77);
  DatasetSplit split = split_chronological(posts, 10, 10, 80);
  CHECK(split.train.size() == 80);
  CHECK(split.validation.size() == 10);
  CHECK(split.test.size() == 10);

  std::set<int64_t> all;
  for (auto v : {&split.train, &split.validation, &split.test}) {
    for (int64_t id : *v) CHECK(all.insert(id).second);  // disjoint
  }
  CHECK(all.size() == 100);

  auto date_of = [&](int64_t id) {
    for (const auto& p : posts) {
      if (p.id == id) return std::make_pair(p.creation_epoch_s, p.id);
    }
    REQUIRE(false);
    return std::make_pair<int64_t, int64_t>(0, 0);
  };
  // every train key <= every validation/test key, every validation <= test
  for (int64_t tr : split.train) {
    for (int64_t va : split.validation) CHECK(date_of(tr) <= date_of(va));
    for (int64_t te : split.test) CHECK(date_of(tr) <= date_of(te));
  }
  for (int64_t va : split.validation) {
    for (int64_t te : split.test) CHECK(date_of(va) <= date_of(te));
  }
}

TEST_CASE("split rejects oversized requests") {
  auto posts = testfix::synthetic_corpus(10, 1);
  CHECK_THROWS_AS(split_chronological(posts, 5, 6), InsufficientData);
  CHECK_THROWS_AS(split_chronological(posts, 0, 5, 6), InsufficientData);
}

TEST_CASE("overlap_ratio on unique tokens") {
  CHECK(overlap_ratio({"a", "b"}, {"a", "c"}) == doctest::Approx(0.5));
  CHECK(overlap_ratio({"a", "a", "b"}, {"a"}) == doctest::Approx(0.5));
  CHECK(overlap_ratio({"a", "b"}, {"b", "a", "c"}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(overlap_ratio({}, {"a"}), EmptyTitle);

  // multiset flag divides clipped counts by the title token count
  CHECK(overlap_ratio({"a", "a", "b"}, {"a"}, true) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("overlap_ratio stays within [0,1]") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    auto title = testfix::random_tokens(rng, 1, 8);
    auto body = testfix::random_tokens(rng, 0, 30);
    for (bool multiset : {false, true}) {
      double r = overlap_ratio(title, body, multiset);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
    auto superset = title;
    superset.insert(superset.end(), body.begin(), body.end());
    CHECK(overlap_ratio(title, superset) == doctest::Approx(1.0));
  }
}

TEST_CASE("corpus_stats per-year proportions") {
  auto posts = testfix::clean_pairs(40, 9);  // all bi-modal, same year
  StatsReport report = corpus_stats(posts);
  REQUIRE(report.by_year.size() == 1);
  CHECK(report.by_year[0].frac_with_code == doctest::Approx(1.0));
  CHECK(report.by_year[0].frac_with_text == doctest::Approx(1.0));
  CHECK(report.posts == 40);
}

TEST_CASE("corpus_stats length fractions") {
  QuestionPost post = good_post();
  std::string body = "";
  for (int i = 0; i < 250; ++i) body += "word ";
  post.body_markup = body + "<code>x</code>";
  StatsReport report = corpus_stats({post});
  CHECK(report.frac_body_over_200 == doctest::Approx(1.0));
}

TEST_CASE("encode_source and encode_target wrap post content") {
  Vocabulary v =
      Vocabulary::build({{"fix", "x", "=", "1", "please", "how", "to"}}, 64, 1);
  SegmentedBody body = parse_body("fix <code>x=1</code> please");

  TokenSequence all = encode_source(body, v);
  CHECK(all.tokens == std::vector<std::string>{"<cls>", "fix", "x", "=", "1",
                                               "please", "<sep>"});
  TokenSequence code_only = encode_source(body, v, true);
  CHECK(code_only.tokens ==
        std::vector<std::string>{"<cls>", "x", "=", "1", "<sep>"});
  CHECK_THROWS_AS(encode_source(body, v, false, 4), SequenceTooLong);

  TokenSequence title = encode_target("How to fix zz9", v);
  CHECK(title.tokens == std::vector<std::string>{"<sos>", "how", "to", "fix",
                                                 "zz9", "<eos>"});
  CHECK(title.ids[4] == Vocabulary::kUnk);  // OOV id, surface kept
}

TEST_CASE("corpus_stats quartiles match a sort-based oracle") {
  auto posts = testfix::synthetic_corpus(1000, 123);
  StatsReport report = corpus_stats(posts);

  std::vector<double> lens;
  for (const auto& p : posts) {
    lens.push_back(static_cast<double>(parse_body(p.body_markup).all_tokens().size()));
  }
  std::sort(lens.begin(), lens.end());
  auto oracle_at = [&](double q) {
    double idx = q * static_cast<double>(lens.size() - 1);
    size_t lo = static_cast<size_t>(idx);
    double frac = idx - static_cast<double>(lo);
    size_t hi = std::min(lo + 1, lens.size() - 1);
    return lens[lo] * (1 - frac) + lens[hi] * frac;
  };
  CHECK(report.body_len.min == doctest::Approx(lens.front()));
  CHECK(report.body_len.q1 == doctest::Approx(oracle_at(0.25)));
  CHECK(report.body_len.median == doctest::Approx(oracle_at(0.5)));
  CHECK(report.body_len.q3 == doctest::Approx(oracle_at(0.75)));
  CHECK(report.body_len.max == doctest::Approx(lens.back()));

  size_t over = 0;
  for (double l : lens) {
    if (l > 200) ++over;
  }
  CHECK(report.frac_body_over_200 ==
        doctest::Approx(static_cast<double>(over) / lens.size()));
}
