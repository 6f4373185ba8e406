#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace titlegen {

using Shape = std::vector<int64_t>;

std::string shape_string(const Shape& shape);
int64_t shape_numel(const Shape& shape);

/// Dense float64 tensor handle. Copies share storage and gradient; all data
/// is row-major. Gradients accumulate into grad() during Tape::backward.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int64_t dim(size_t axis) const;
  size_t rank() const;
  int64_t numel() const;

  std::vector<double>& data();
  const std::vector<double>& data() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool value);

  /// Gradient buffer, zero-allocated on first access.
  std::vector<double>& grad();
  bool has_grad() const;
  void zero_grad();

  /// Value of a one-element tensor.
  double item() const;
  double at(std::initializer_list<int64_t> index) const;

  /// Deep copy of values (no autodiff link, grad not copied).
  Tensor clone() const;

  /// Identity of the underlying storage; used to deduplicate parameters.
  const void* node_id() const { return node_.get(); }

 private:
  struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

/// Reverse-mode tape, one per thread. Differentiable ops push their backward
/// rule while recording is enabled; backward() replays them newest-first and
/// clears the tape.
class Tape {
 public:
  static Tape& active();

  void record(std::function<void()> backward_step);
  bool recording() const { return enabled_; }
  size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Throws
  /// NonScalarLoss unless loss has exactly one element.
  void backward(Tensor loss);

 private:
  friend struct NoGradGuard;
  std::vector<std::function<void()>> steps_;
  bool enabled_ = true;
};

/// Disables tape recording for the current scope.
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace ops {

// All ops validate shapes and throw ShapeMismatch (message carries both
// shapes). Binary ops require equal shapes unless noted.

Tensor matmul(const Tensor& a, const Tensor& b);  // (m,k)x(k,n)
/// Equal shapes, or b broadcast row-wise: (m,n)+(n) / (m,n)+(1,n).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product; either operand may be a 1-element tensor (scalar
/// broadcast).
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor neg(const Tensor& a);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor gelu(const Tensor& a);  // exact erf form
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
/// max(a, floor) elementwise; gradient is zero where clamped.
Tensor clamp_min(const Tensor& a, double floor);

/// Numerically stabilized softmax along an axis (max subtracted per slice).
Tensor softmax(const Tensor& a, int axis);
Tensor log_softmax(const Tensor& a, int axis);

/// Normalizes the last axis, then applies elementwise gain and bias (both
/// shaped like the last axis).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

/// Rows of table selected by ids: (V,d) -> (ids.size(), d).
Tensor embedding_lookup(const Tensor& table, const std::vector<int64_t>& ids);

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, int64_t start, int64_t length);
Tensor transpose(const Tensor& a);  // 2-D
/// Same data, new shape (element count preserved).
Tensor reshape(const Tensor& a, Shape shape);

/// Writes value at positions where mask!=0; masked positions get exactly
/// zero gradient. mask.size() must equal numel.
Tensor masked_fill(const Tensor& a, const std::vector<uint8_t>& mask, double value);

Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, int axis);

/// out[i] = a.data[flat_indices[i]] (1-D result over flat storage).
Tensor gather(const Tensor& a, const std::vector<int64_t>& flat_indices);

/// 1-D result of out_size zeros with values[i] added at indices[i];
/// index -1 drops the value.
Tensor scatter_add(const Tensor& values, const std::vector<int64_t>& indices,
                   int64_t out_size);

/// Inverted dropout; identity when training is false or p == 0.
Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng, bool training);

}  // namespace ops

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0;
  int64_t checked_elements = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0;
  bool passed(double tol) const { return max_rel_err < tol; }
};

/// Compares analytic gradients of f (a scalar-valued forward pass over the
/// given named parameters) against central finite differences
/// (f(p+eps)-f(p-eps))/(2 eps). The relative error denominator is
/// max(|analytic|, |numeric|, 1e-3) so zero gradients compare cleanly.
/// max_elements_per_param limits checked entries per tensor (seeded
/// subsample); by default every element is checked.
GradCheckReport grad_check(
    const std::function<Tensor()>& f,
    const std::vector<std::pair<std::string, Tensor>>& params, double eps = 1e-5,
    std::optional<size_t> max_elements_per_param = std::nullopt,
    uint64_t sample_seed = 0);

}  // namespace titlegen
