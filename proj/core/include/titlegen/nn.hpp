#pragma once

#include <random>
#include <string>
#include <vector>

#include "titlegen/tensor.hpp"

namespace titlegen {

/// Creates and registers named parameters. Weights draw from normal(0, std),
/// biases start at zero; all parameters require gradients.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed, double init_std = 0.02);

  Tensor normal(const std::string& name, Shape shape);
  Tensor zeros(const std::string& name, Shape shape);

  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

 private:
  Tensor insert(const std::string& name, Tensor t);
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_;
  std::vector<std::pair<std::string, Tensor>> entries_;
};

struct Linear {
  Tensor weight;  // (in, out)
  Tensor bias;    // (out)

  static Linear create(ParamStore& store, const std::string& name, int64_t in,
                       int64_t out);
  Tensor operator()(const Tensor& x) const;  // (n, in) -> (n, out)
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;

  static LayerNorm create(ParamStore& store, const std::string& name, int64_t width);
  Tensor operator()(const Tensor& x) const;
};

/// Scaled dot-product attention over n_heads column blocks. kv_pad_mask marks
/// key positions excluded from every query's softmax; causal additionally
/// hides keys j > i.
struct MultiHeadAttention {
  int n_heads = 1;
  Linear query, key, value, output;

  static MultiHeadAttention create(ParamStore& store, const std::string& name,
                                   int64_t d_model, int n_heads);
  Tensor operator()(const Tensor& q_input, const Tensor& kv_input,
                    const std::vector<uint8_t>& kv_pad_mask, bool causal) const;
};

struct FeedForward {
  Linear expand, project;

  static FeedForward create(ParamStore& store, const std::string& name,
                            int64_t d_model, int64_t hidden);
  Tensor operator()(const Tensor& x) const;  // project(gelu(expand(x)))
};

}  // namespace titlegen
