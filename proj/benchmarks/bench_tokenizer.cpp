#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "titlegen/corpus.hpp"
#include "titlegen/tokenizer.hpp"

namespace {

std::string make_body(size_t words) {
  static const char* pool[] = {"trying", "to", "sort", "a", "HashMap", "by",
                               "value", "in", "Java,", "code:", "x=1;", "f(x)"};
  std::mt19937_64 rng(42);
  std::string out;
  for (size_t i = 0; i < words; ++i) {
    out += pool[rng() % 12];
    out += ' ';
    if (i % 40 == 39) out += "<code>map.entrySet().stream().sorted();</code> ";
  }
  return out;
}

void bm_tokenize(benchmark::State& state) {
  std::string body = make_body(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(titlegen::tokenize(body));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * body.size()));
}
BENCHMARK(bm_tokenize)->Arg(100)->Arg(1000);

void bm_parse_body(benchmark::State& state) {
  std::string body = make_body(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(titlegen::parse_body(body));
  }
}
BENCHMARK(bm_parse_body)->Arg(1000);

}  // namespace
