#pragma once

// Deterministic synthetic corpora for tests and the acceptance suite. All
// content is derived from the seed alone, so fixtures are reproducible
// across runs without files checked into the repository.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "titlegen/corpus.hpp"
#include "titlegen/tokenizer.hpp"
#include "titlegen/trainer.hpp"

namespace testfix {

// Mixed-quality posts exercising every filter constraint: closed posts,
// missing accepted answers, low scores, excluded tags, text-only and
// code-only bodies, non-interrogative titles, overlong bodies/titles and
// duplicate creation dates.
std::vector<titlegen::QuestionPost> synthetic_corpus(size_t n, uint64_t seed);

// Clean already-filterable question/title pairs for training runs; every
// post passes the default filters. Sources stay short.
std::vector<titlegen::QuestionPost> clean_pairs(size_t n, uint64_t seed);

// Pairs whose titles contain a rare identifier that only occurs in the
// paired body, never anywhere else in the corpus. With a min_count cap the
// identifiers fall out of the vocabulary, so only the copy path can produce
// them.
std::vector<titlegen::QuestionPost> copy_task_corpus(size_t n, uint64_t seed);

// Random token list of the given length range drawn from a small pool
// (shared tokens make n-gram overlaps likely).
std::vector<std::string> random_tokens(std::mt19937_64& rng, size_t min_len,
                                       size_t max_len);

// Vocabulary over the bodies+titles of the given posts.
titlegen::Vocabulary build_corpus_vocab(
    const std::vector<titlegen::QuestionPost>& posts, size_t max_size,
    size_t min_count = 1);

// Wrapped training examples; code_only selects code segments only.
std::vector<titlegen::TrainingExample> make_examples(
    const std::vector<titlegen::QuestionPost>& posts,
    const titlegen::Vocabulary& vocab, bool code_only = false,
    size_t max_source_len = 0, size_t max_target_len = 0);

}  // namespace testfix
