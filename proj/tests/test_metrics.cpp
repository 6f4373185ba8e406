#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "reference_scorer.hpp"
#include "titlegen/errors.hpp"
#include "titlegen/metrics.hpp"

using namespace titlegen;
using refscore::Tokens;

TEST_CASE("bleus4 boundary cases") {
  Tokens four = {"how", "to", "sort", "list"};
  CHECK(bleus4(four, four) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bleus4({"a", "b"}, {"c", "d"}) == 0.0);  // zero unigram overlap
  CHECK(bleus4({}, {"a"}) == 0.0);               // empty candidate convention
  // identical short pair: empty n-gram sets smooth to (0+1)/(0+1)
  CHECK(bleus4({"a", "b"}, {"a", "b"}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bleus4 matches the hand-enumerated oracle value") {
  // candidate [how,to,sort,list] vs reference [how,to,sort,a,list]:
  // p1 = 4/4, p2 = (2+1)/(3+1), p3 = (1+1)/(2+1), p4 = (0+1)/(1+1),
  // BP = exp(1 - 5/4).
  Tokens cand = {"how", "to", "sort", "list"};
  Tokens ref = {"how", "to", "sort", "a", "list"};
  double expected =
      std::exp(1.0 - 5.0 / 4.0) *
      std::pow(1.0 * (3.0 / 4.0) * (2.0 / 3.0) * (1.0 / 2.0), 0.25);
  double got = bleus4(cand, ref);
  CHECK(std::fabs(got - expected) < 1e-12);
  CHECK(std::fabs(got - 0.5506953149) < 1e-9);  // hand-computed before the build
  CHECK(std::fabs(refscore::bleus4(cand, ref) - got) < 1e-12);
}

TEST_CASE("bleus4 clips repeated candidate n-grams") {
  // p1 = min(3,1)/3, p2 = (0+1)/(2+1), p3 = (0+1)/(1+1), p4 = (0+1)/(0+1),
  // BP = 1 since the candidate is longer.
  Tokens cand = {"the", "the", "the"};
  Tokens ref = {"the", "cat"};
  double expected = std::pow((1.0 / 3.0) * (1.0 / 3.0) * (1.0 / 2.0), 0.25);
  CHECK(bleus4(cand, ref) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rouge_n recall with clipping") {
  CHECK(rouge_n({"a", "b"}, {"a", "b"}, 1) == doctest::Approx(1.0));
  CHECK(rouge_n({"a"}, {"b"}, 1) == 0.0);
  CHECK(rouge_n({"a", "b", "b"}, {"b", "b", "c"}, 1) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_n({"a", "b"}, {"c"}, 2) == 0.0);  // reference has no bigrams
  CHECK_THROWS_AS(rouge_n({"a"}, {}, 1), EmptyReference);
}

TEST_CASE("rouge_l uses the LCS F-measure") {
  Tokens a = {"x", "y", "z"};
  CHECK(rouge_l(a, a) == doctest::Approx(1.0));
  // LCS([a,b,c,d],[b,d]) = 2 -> R=1, P=0.5, F = 2/3
  CHECK(rouge_l({"a", "b", "c", "d"}, {"b", "d"}) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_l({"a"}, {"b"}) == 0.0);
  CHECK_THROWS_AS(rouge_l({"a"}, {}), EmptyInput);
  CHECK(rouge_l({}, {"a"}) == 0.0);  // empty candidate convention

  // strict printed form drops the factor of 2: identical sequences score 0.5
  RougeLOptions strict{.strict_printed_form = true};
  CHECK(rouge_l(a, a, strict) == doctest::Approx(0.5));
}

TEST_CASE("lcs properties") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto a = testfix::random_tokens(rng, 0, 12);
    auto b = testfix::random_tokens(rng, 0, 12);
    size_t l = lcs_length(a, b);
    CHECK(l == refscore::lcs(a, b));
    CHECK(lcs_length(a, a) == a.size());
    // appending a common token to both grows the LCS
    auto a2 = a, b2 = b;
    a2.push_back("zzz");
    b2.push_back("zzz");
    CHECK(lcs_length(a2, b2) >= l + 1);
  }
}

TEST_CASE("bleus4 is invariant under consistent token relabeling") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    auto cand = testfix::random_tokens(rng, 1, 10);
    auto ref = testfix::random_tokens(rng, 1, 10);
    auto relabel = [](const Tokens& in) {
      Tokens out;
      for (const auto& t : in) out.push_back("R__" + t + "__L");
      return out;
    };
    CHECK(bleus4(cand, ref) ==
          doctest::Approx(bleus4(relabel(cand), relabel(ref))).epsilon(1e-12));
  }
}

TEST_CASE("all metrics stay in [0,1] and equal sequences score 1") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    auto cand = testfix::random_tokens(rng, 1, 12);
    auto ref = testfix::random_tokens(rng, 1, 12);
    for (double v : {bleus4(cand, ref), rouge_n(cand, ref, 1),
                     rouge_n(cand, ref, 2), rouge_l(cand, ref)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(bleus4(ref, ref) == doctest::Approx(1.0));
    CHECK(rouge_n(ref, ref, 1) == doctest::Approx(1.0));
    CHECK(rouge_l(ref, ref) == doctest::Approx(1.0));
  }
}

TEST_CASE("rouge_n(c, r, 1) is 1 when reference unigrams fit inside candidate") {
  CHECK(rouge_n({"a", "b", "c", "c"}, {"c", "a"}, 1) == doctest::Approx(1.0));
}

TEST_CASE("implementation agrees with the independent reference scorer") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    auto cand = testfix::random_tokens(rng, 1, 14);
    auto ref = testfix::random_tokens(rng, 1, 14);
    CHECK(std::fabs(bleus4(cand, ref) - refscore::bleus4(cand, ref)) < 1e-9);
    CHECK(std::fabs(rouge_n(cand, ref, 1) - refscore::rouge_n(cand, ref, 1)) < 1e-9);
    CHECK(std::fabs(rouge_n(cand, ref, 2) - refscore::rouge_n(cand, ref, 2)) < 1e-9);
    CHECK(std::fabs(rouge_l(cand, ref) - refscore::rouge_l(cand, ref)) < 1e-9);
  }
}

TEST_CASE("evaluate_corpus averages per-example scores") {
  Tokens a = {"how", "to", "sort"};
  Tokens b = {"how", "to", "sort", "maps"};

  MetricReport single = evaluate_corpus({a}, {b});
  CHECK(single.overall.examples == 1);
  CHECK(single.overall.bleus4 == doctest::Approx(bleus4(a, b)));
  CHECK(single.overall.rougeL == doctest::Approx(rouge_l(a, b)));

  MetricReport identical = evaluate_corpus({a, b}, {a, b});
  CHECK(identical.overall.bleus4 == doctest::Approx(1.0));
  CHECK(identical.overall.rouge1 == doctest::Approx(1.0));
  CHECK(identical.overall.rouge2 == doctest::Approx(1.0));
  CHECK(identical.overall.rougeL == doctest::Approx(1.0));

  MetricReport by_lang = evaluate_corpus({a, b}, {b, b}, {"java", "php"});
  CHECK(by_lang.by_language.size() == 2);
  CHECK(by_lang.by_language.at("php").bleus4 == doctest::Approx(1.0));
  CHECK(by_lang.overall.examples == 2);

  CHECK_THROWS_AS(evaluate_corpus({a}, {}), LengthMismatch);
  CHECK_THROWS_AS(evaluate_corpus({a}, {b}, {"java", "php"}), LengthMismatch);

  RougeLOptions strict{.strict_printed_form = true};
  MetricReport printed = evaluate_corpus({a}, {a}, {}, strict);
  CHECK(printed.overall.rougeL == doctest::Approx(0.5));
}
