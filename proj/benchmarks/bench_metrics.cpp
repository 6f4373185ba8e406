#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "titlegen/metrics.hpp"

namespace {

std::vector<std::string> random_title(std::mt19937_64& rng, size_t len) {
  static const char* pool[] = {"how", "to", "sort", "a", "map", "in", "java",
                               "by", "value", "list", "x", "error"};
  std::vector<std::string> out;
  for (size_t i = 0; i < len; ++i) out.emplace_back(pool[rng() % 12]);
  return out;
}

void bm_bleus4(benchmark::State& state) {
  std::mt19937_64 rng(7);
  auto cand = random_title(rng, 12);
  auto ref = random_title(rng, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(titlegen::bleus4(cand, ref));
  }
}
BENCHMARK(bm_bleus4);

void bm_rouge_l(benchmark::State& state) {
  std::mt19937_64 rng(8);
  auto cand = random_title(rng, static_cast<size_t>(state.range(0)));
  auto ref = random_title(rng, static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(titlegen::rouge_l(cand, ref));
  }
}
BENCHMARK(bm_rouge_l)->Arg(12)->Arg(25);

}  // namespace
