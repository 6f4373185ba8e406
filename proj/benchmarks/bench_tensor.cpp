#include <benchmark/benchmark.h>

#include <random>

#include "titlegen/tensor.hpp"

using namespace titlegen;

namespace {

Tensor random_tensor(Shape shape, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

void bm_matmul(benchmark::State& state) {
  int64_t n = state.range(0);
  Tensor a = random_tensor({n, n}, 1);
  Tensor b = random_tensor({n, n}, 2);
  NoGradGuard no_grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::matmul(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128);

void bm_softmax_rows(benchmark::State& state) {
  Tensor a = random_tensor({256, state.range(0)}, 3);
  NoGradGuard no_grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::softmax(a, 1));
  }
}
BENCHMARK(bm_softmax_rows)->Arg(256);

void bm_backward_mlp(benchmark::State& state) {
  Tensor w1 = random_tensor({64, 256}, 4);
  w1.set_requires_grad(true);
  Tensor w2 = random_tensor({256, 64}, 5);
  w2.set_requires_grad(true);
  Tensor x = random_tensor({32, 64}, 6);
  for (auto _ : state) {
    Tape::active().clear();
    Tensor loss = ops::mean(ops::gelu(ops::matmul(ops::gelu(ops::matmul(x, w1)), w2)));
    w1.zero_grad();
    w2.zero_grad();
    Tape::active().backward(loss);
    benchmark::DoNotOptimize(w1.grad().data());
  }
}
BENCHMARK(bm_backward_mlp);

}  // namespace
