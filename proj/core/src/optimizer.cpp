#include "titlegen/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace titlegen {

Adam::Adam(std::vector<std::pair<std::string, Tensor>>& params, AdamOptions opts)
    : opts_(opts) {
  params_.reserve(params.size());
  for (auto& [name, tensor] : params) {
    params_.push_back(tensor);
    m_.emplace_back(tensor.data().size(), 0.0);
    v_.emplace_back(tensor.data().size(), 0.0);
  }
}

double Adam::lr_at(int64_t t) const {
  if (opts_.total_steps <= 0 || opts_.warmup_fraction <= 0.0) return opts_.lr;
  int64_t warmup = static_cast<int64_t>(
      std::llround(opts_.warmup_fraction * static_cast<double>(opts_.total_steps)));
  if (warmup <= 0 || t > warmup) return opts_.lr;
  return opts_.lr * static_cast<double>(t) / static_cast<double>(warmup);
}

void Adam::step() {
  ++t_;
  double lr = lr_at(t_);

  double clip_scale = 1.0;
  if (opts_.grad_clip > 0.0) {
    double norm_sq = 0.0;
    for (auto& p : params_) {
      if (!p.has_grad()) continue;
      for (double g : p.grad()) norm_sq += g * g;
    }
    double norm = std::sqrt(norm_sq);
    if (norm > opts_.grad_clip) clip_scale = opts_.grad_clip / norm;
  }

  double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& data = params_[i].data();
    auto& grad = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < data.size(); ++j) {
      double g = grad[j] * clip_scale;
      m[j] = opts_.beta1 * m[j] + (1.0 - opts_.beta1) * g;
      v[j] = opts_.beta2 * v[j] + (1.0 - opts_.beta2) * g * g;
      double m_hat = m[j] / bc1;
      double v_hat = v[j] / bc2;
      data[j] -= lr * m_hat / (std::sqrt(v_hat) + opts_.epsilon);
      if (opts_.weight_decay > 0.0) data[j] -= lr * opts_.weight_decay * data[j];
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace titlegen
