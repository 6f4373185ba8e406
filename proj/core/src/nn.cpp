#include "titlegen/nn.hpp"

#include <cmath>

#include "titlegen/errors.hpp"

namespace titlegen {

ParamStore::ParamStore(uint64_t seed, double init_std)
    : rng_(seed), dist_(0.0, init_std) {}

Tensor ParamStore::insert(const std::string& name, Tensor t) {
  for (const auto& [existing, unused] : entries_) {
    if (existing == name) throw Error("duplicate parameter name: " + name);
  }
  entries_.emplace_back(name, t);
  return t;
}

Tensor ParamStore::normal(const std::string& name, Shape shape) {
  Tensor t = Tensor::zeros(shape, true);
  for (double& v : t.data()) v = dist_(rng_);
  return insert(name, t);
}

Tensor ParamStore::zeros(const std::string& name, Shape shape) {
  return insert(name, Tensor::zeros(shape, true));
}

Linear Linear::create(ParamStore& store, const std::string& name, int64_t in,
                      int64_t out) {
  Linear l;
  l.weight = store.normal(name + ".weight", {in, out});
  l.bias = store.zeros(name + ".bias", {out});
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  return ops::add(ops::matmul(x, weight), bias);
}

LayerNorm LayerNorm::create(ParamStore& store, const std::string& name,
                            int64_t width) {
  LayerNorm ln;
  ln.gain = store.zeros(name + ".gain", {width});
  for (double& v : ln.gain.data()) v = 1.0;
  ln.bias = store.zeros(name + ".bias", {width});
  return ln;
}

Tensor LayerNorm::operator()(const Tensor& x) const {
  return ops::layer_norm(x, gain, bias);
}

MultiHeadAttention MultiHeadAttention::create(ParamStore& store,
                                              const std::string& name,
                                              int64_t d_model, int n_heads) {
  if (d_model % n_heads != 0) {
    throw Error("d_model " + std::to_string(d_model) + " not divisible by " +
                std::to_string(n_heads) + " heads");
  }
  MultiHeadAttention mha;
  mha.n_heads = n_heads;
  mha.query = Linear::create(store, name + ".q", d_model, d_model);
  mha.key = Linear::create(store, name + ".k", d_model, d_model);
  mha.value = Linear::create(store, name + ".v", d_model, d_model);
  mha.output = Linear::create(store, name + ".o", d_model, d_model);
  return mha;
}

Tensor MultiHeadAttention::operator()(const Tensor& q_input, const Tensor& kv_input,
                                      const std::vector<uint8_t>& kv_pad_mask,
                                      bool causal) const {
  int64_t lq = q_input.dim(0);
  int64_t lk = kv_input.dim(0);
  int64_t d = q_input.dim(1);
  int64_t dh = d / n_heads;
  if (!kv_pad_mask.empty() && static_cast<int64_t>(kv_pad_mask.size()) != lk) {
    throw ShapeMismatch("attention: pad mask length " +
                        std::to_string(kv_pad_mask.size()) + " vs keys " +
                        std::to_string(lk));
  }

  Tensor q = query(q_input);
  Tensor k = key(kv_input);
  Tensor v = value(kv_input);

  std::vector<uint8_t> score_mask(static_cast<size_t>(lq * lk), 0);
  bool any_masked = false;
  for (int64_t i = 0; i < lq; ++i) {
    for (int64_t j = 0; j < lk; ++j) {
      bool hide = (causal && j > i) ||
                  (!kv_pad_mask.empty() && kv_pad_mask[static_cast<size_t>(j)]);
      if (hide) {
        score_mask[static_cast<size_t>(i * lk + j)] = 1;
        any_masked = true;
      }
    }
  }

  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> heads;
  heads.reserve(static_cast<size_t>(n_heads));
  for (int h = 0; h < n_heads; ++h) {
    Tensor qh = ops::slice(q, 1, h * dh, dh);
    Tensor kh = ops::slice(k, 1, h * dh, dh);
    Tensor vh = ops::slice(v, 1, h * dh, dh);
    Tensor scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt);
    if (any_masked) scores = ops::masked_fill(scores, score_mask, -1e30);
    Tensor attn = ops::softmax(scores, 1);
    heads.push_back(ops::matmul(attn, vh));
  }
  Tensor merged = n_heads == 1 ? heads[0] : ops::concat(heads, 1);
  return output(merged);
}

FeedForward FeedForward::create(ParamStore& store, const std::string& name,
                                int64_t d_model, int64_t hidden) {
  FeedForward ff;
  ff.expand = Linear::create(store, name + ".expand", d_model, hidden);
  ff.project = Linear::create(store, name + ".project", hidden, d_model);
  return ff;
}

Tensor FeedForward::operator()(const Tensor& x) const {
  return project(ops::gelu(expand(x)));
}

}  // namespace titlegen
