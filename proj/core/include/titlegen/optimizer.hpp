#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "titlegen/tensor.hpp"

namespace titlegen {

struct AdamOptions {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Learning rate ramps linearly over the first warmup_fraction of
  /// total_steps, then stays at lr. total_steps == 0 disables warmup.
  double warmup_fraction = 0.1;
  int64_t total_steps = 0;
  double grad_clip = 0.0;     // global L2 norm; 0 = off
  double weight_decay = 0.0;  // decoupled; 0 = off
};

/// Adam with bias correction and linear learning-rate warmup.
class Adam {
 public:
  Adam(std::vector<std::pair<std::string, Tensor>>& params, AdamOptions opts);

  void step();
  void zero_grad();

  int64_t step_count() const { return t_; }
  double lr_at(int64_t t) const;
  double current_lr() const { return lr_at(t_); }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamOptions opts_;
  int64_t t_ = 0;
};

}  // namespace titlegen
