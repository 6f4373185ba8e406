#include "fixtures.hpp"

#include <array>

namespace testfix {

using namespace titlegen;

namespace {

const std::vector<std::string> kVerbs = {
    "create", "sort", "parse", "convert", "read",   "write", "merge",
    "filter", "split", "format", "update", "delete", "render", "load"};
const std::vector<std::string> kNouns = {
    "list",  "map",    "array",  "string", "file",   "json",   "table",
    "query", "thread", "stream", "buffer", "socket", "object", "index",
    "date",  "image",  "button", "loop",   "class",  "method"};
const std::vector<std::string> kLangs = {"java", "python", "javascript", "php"};
const std::vector<std::string> kFiller = {
    "i",    "am",   "trying", "my",   "code",  "throws", "an",  "error",
    "when", "it",   "runs",   "the",  "value", "is",     "not", "correct",
    "can",  "not",  "find",   "any",  "way",   "this",   "does", "work"};

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& pool) {
  return pool[rng() % pool.size()];
}

std::string make_code(std::mt19937_64& rng, const std::string& noun) {
  std::string code = noun + " x = new " + noun + "();\n";
  code += "x." + pick(rng, kVerbs) + "(" + std::to_string(rng() % 100) + ");\n";
  if (rng() % 2) code += "return x;\n";
  return code;
}

int64_t base_date(int year) {
  // Jan 1 of the year, 00:00 UTC.
  return (static_cast<int64_t>(year) - 1970) * 31557600;  // ~365.25 days
}

}  // namespace

std::vector<QuestionPost> synthetic_corpus(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<QuestionPost> posts;
  posts.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    QuestionPost post;
    post.id = static_cast<int64_t>(i + 1);
    int year = 2014 + static_cast<int>(rng() % 7);
    // Two posts in ten share a timestamp with a neighbor to exercise
    // tie-breaking in the chronological split.
    int64_t offset = static_cast<int64_t>((rng() % 360) * 86400 + (i / 10) * 60);
    post.creation_epoch_s = base_date(year) + offset;

    const std::string& verb = pick(rng, kVerbs);
    const std::string& noun = pick(rng, kNouns);
    const std::string& lang = pick(rng, kLangs);
    switch (rng() % 8) {
      case 0:
        post.title = lang + " " + noun + " " + verb;  // no interrogative
        break;
      case 1:
        post.title = "what is the " + noun + " " + pick(rng, kNouns) + " in " + lang;
        break;
      case 2:
        post.title = "why does " + noun + " " + verb + " fail";
        break;
      default:
        post.title = "how to " + verb + " a " + noun + " in " + lang;
        break;
    }

    std::string text = "i am trying to " + verb + " a " + noun + " . ";
    for (int w = 0; w < static_cast<int>(rng() % 12); ++w) {
      text += pick(rng, kFiller) + " ";
    }
    switch (rng() % 10) {
      case 0:  // text only
        post.body_markup = text;
        break;
      case 1:  // code only
        post.body_markup = "<code>" + make_code(rng, noun) + "</code>";
        break;
      case 2: {  // overlong body
        std::string big = text;
        for (int w = 0; w < 300; ++w) big += pick(rng, kFiller) + " ";
        post.body_markup = big + "<code>" + make_code(rng, noun) + "</code>";
        break;
      }
      default:
        post.body_markup = text + "<code>" + make_code(rng, noun) + "</code>" +
                           " please help .";
        break;
    }

    post.tags.push_back(lang);
    if (rng() % 10 == 0) post.tags.push_back("c++");
    if (rng() % 11 == 0) post.tags.emplace_back("arrays");
    post.score = static_cast<int>(rng() % 6);  // 0..5, some below the cutoff
    post.has_accepted_answer = rng() % 10 != 0;
    post.is_closed = rng() % 12 == 0;
    posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<QuestionPost> clean_pairs(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<QuestionPost> posts;
  posts.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    QuestionPost post;
    post.id = static_cast<int64_t>(i + 1);
    post.creation_epoch_s = base_date(2019) + static_cast<int64_t>(i) * 3600;
    const std::string& verb = kVerbs[i % kVerbs.size()];
    const std::string& noun = kNouns[(i / kVerbs.size() + i) % kNouns.size()];
    const std::string& lang = kLangs[i % kLangs.size()];
    post.title = "how to " + verb + " a " + noun + " in " + lang;
    post.body_markup = "i want to " + verb + " the " + noun + " " +
                       pick(rng, kFiller) + " . <code>x." + verb + "(" + noun +
                       ");</code>";
    post.tags.push_back(lang);
    post.score = 3;
    post.has_accepted_answer = true;
    post.is_closed = false;
    posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<QuestionPost> copy_task_corpus(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<QuestionPost> posts;
  posts.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    QuestionPost post;
    post.id = static_cast<int64_t>(i + 1);
    post.creation_epoch_s = base_date(2020) + static_cast<int64_t>(i) * 3600;
    // One rare identifier per pair; it never recurs in other posts.
    std::string ident = "zq" + std::to_string(i) + "lib";
    const std::string& verb = pick(rng, kVerbs);
    const std::string& lang = pick(rng, kLangs);
    post.title = "how to use " + ident + " in " + lang;
    post.body_markup = "i am trying to use " + ident + " in my " + lang +
                       " project . it fails with an error . <code>" + ident +
                       ".run();</code>";
    post.tags.push_back(lang);
    post.score = 5;
    post.has_accepted_answer = true;
    post.is_closed = false;
    posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, size_t min_len,
                                       size_t max_len) {
  static const std::vector<std::string> pool = {
      "how", "to",  "a",    "the", "in",  "sort", "list", "map",  "java",
      "x",   "=",   "1",    "?",   ".",   "error", "file", "read", "loop",
      "of",  "and", "value"};
  size_t len = min_len + (max_len > min_len ? rng() % (max_len - min_len + 1) : 0);
  std::vector<std::string> tokens;
  tokens.reserve(len);
  for (size_t i = 0; i < len; ++i) tokens.push_back(pick(rng, pool));
  return tokens;
}

Vocabulary build_corpus_vocab(const std::vector<QuestionPost>& posts,
                              size_t max_size, size_t min_count) {
  std::vector<std::vector<std::string>> streams;
  streams.reserve(posts.size() * 2);
  for (const auto& post : posts) {
    streams.push_back(parse_body(post.body_markup).all_tokens());
    streams.push_back(tokenize(post.title));
  }
  return Vocabulary::build(streams, max_size, min_count);
}

std::vector<TrainingExample> make_examples(const std::vector<QuestionPost>& posts,
                                           const Vocabulary& vocab, bool code_only,
                                           size_t max_source_len,
                                           size_t max_target_len) {
  std::vector<TrainingExample> examples;
  examples.reserve(posts.size());
  for (const auto& post : posts) {
    SegmentedBody body = parse_body(post.body_markup);
    TrainingExample ex;
    ex.source = encode_wrapped_source(
        code_only ? body.code_tokens() : body.all_tokens(), vocab, max_source_len);
    ex.target = encode_wrapped_target(tokenize(post.title), vocab, max_target_len);
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace testfix
