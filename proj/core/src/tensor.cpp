#include "titlegen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "titlegen/errors.hpp"
#include "titlegen/util.hpp"

namespace titlegen {

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  out += ")";
  return out;
}

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

namespace {

void check_shape_valid(const Shape& shape) {
  for (int64_t d : shape) {
    if (d <= 0) throw ShapeMismatch("invalid tensor shape " + shape_string(shape));
  }
}

[[noreturn]] void mismatch(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeMismatch(op + ": incompatible shapes " + shape_string(a) + " and " +
                      shape_string(b));
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  check_shape_valid(shape);
  auto node = std::make_shared<Node>();
  node->data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  check_shape_valid(shape);
  if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
    throw ShapeMismatch("from_vector: shape " + shape_string(shape) +
                        " does not hold " + std::to_string(values.size()) +
                        " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_vector({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
int64_t Tensor::dim(size_t axis) const { return node_->shape.at(axis); }
size_t Tensor::rank() const { return node_->shape.size(); }
int64_t Tensor::numel() const { return static_cast<int64_t>(node_->data.size()); }

std::vector<double>& Tensor::data() { return node_->data; }
const std::vector<double>& Tensor::data() const { return node_->data; }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
Tensor& Tensor::set_requires_grad(bool value) {
  node_->requires_grad = value;
  return *this;
}

std::vector<double>& Tensor::grad() {
  if (node_->grad.size() != node_->data.size()) {
    node_->grad.assign(node_->data.size(), 0.0);
  }
  return node_->grad;
}

bool Tensor::has_grad() const {
  return node_ && node_->grad.size() == node_->data.size();
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeMismatch("item(): tensor has shape " + shape_string(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::initializer_list<int64_t> index) const {
  if (index.size() != rank()) {
    throw ShapeMismatch("at(): rank mismatch for shape " + shape_string(shape()));
  }
  int64_t flat = 0;
  size_t axis = 0;
  for (int64_t i : index) {
    flat = flat * node_->shape[axis] + i;
    ++axis;
  }
  return node_->data.at(static_cast<size_t>(flat));
}

Tensor Tensor::clone() const {
  return Tensor::from_vector(shape(), data(), false);
}

Tape& Tape::active() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(std::function<void()> backward_step) {
  if (enabled_) steps_.push_back(std::move(backward_step));
}

void Tape::backward(Tensor loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw NonScalarLoss("backward() expects a scalar loss");
  }
  loss.grad()[0] += 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  steps_.clear();
}

NoGradGuard::NoGradGuard() : previous_(Tape::active().enabled_) {
  Tape::active().enabled_ = false;
}
NoGradGuard::~NoGradGuard() { Tape::active().enabled_ = previous_; }

namespace ops {

namespace {

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::active().recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Decomposes a shape around `axis` into (outer, len, inner) so flat index
// (o*len + j)*inner + i walks the axis with j.
struct AxisView {
  int64_t outer = 1, len = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, int axis) {
  int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ShapeMismatch("axis " + std::to_string(axis) + " out of range for " +
                        shape_string(shape));
  }
  AxisView v;
  for (int i = 0; i < axis; ++i) v.outer *= shape[i];
  v.len = shape[axis];
  for (int i = axis + 1; i < rank; ++i) v.inner *= shape[i];
  return v;
}

int normalize_axis(const Shape& shape, int axis) {
  int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ShapeMismatch("axis out of range for " + shape_string(shape));
  }
  return axis;
}

Tensor unary_op(const Tensor& a, const std::function<double(double)>& fwd,
                const std::function<double(double, double, double)>& dinput) {
  // dinput(x, y, dy) -> contribution to dx
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  auto& y = out.data();
  for (size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, dinput]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      const auto& x = in.data();
      const auto& y = out.data();
      for (size_t i = 0; i < dx.size(); ++i) dx[i] += dinput(x[i], y[i], dy[i]);
    });
  }
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    mismatch("matmul", a.shape(), b.shape());
  }
  int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  const auto& pa = a.data();
  const auto& pb = b.data();
  auto& pc = out.data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t kk = 0; kk < k; ++kk) {
      double av = pa[i * k + kk];
      if (av == 0.0) continue;
      const double* brow = &pb[kk * n];
      double* crow = &pc[i * n];
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  if (should_record({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ta = a, tb = b;
    Tape::active().record([ta, tb, out, m, k, n]() mutable {
      const auto& dy = out.grad();
      if (ta.requires_grad()) {
        auto& da = ta.grad();
        const auto& pb = tb.data();
        // dA += dY * B^T
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t kk = 0; kk < k; ++kk) {
            double acc = 0;
            const double* dyrow = &dy[i * n];
            const double* brow = &pb[kk * n];
            for (int64_t j = 0; j < n; ++j) acc += dyrow[j] * brow[j];
            da[i * k + kk] += acc;
          }
        }
      }
      if (tb.requires_grad()) {
        auto& db = tb.grad();
        const auto& pa = ta.data();
        // dB += A^T * dY
        for (int64_t kk = 0; kk < k; ++kk) {
          for (int64_t i = 0; i < m; ++i) {
            double av = pa[i * k + kk];
            if (av == 0.0) continue;
            const double* dyrow = &dy[i * n];
            double* dbrow = &db[kk * n];
            for (int64_t j = 0; j < n; ++j) dbrow[j] += av * dyrow[j];
          }
        }
      }
    });
  }
  return out;
}

namespace {

bool row_broadcastable(const Shape& a, const Shape& b) {
  // b is a bias over the last axis of a
  if (a.size() != 2) return false;
  if (b.size() == 1) return b[0] == a[1];
  if (b.size() == 2) return b[0] == 1 && b[1] == a[1];
  return false;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  bool same = a.shape() == b.shape();
  bool bias = !same && row_broadcastable(a.shape(), b.shape());
  if (!same && !bias) mismatch("add", a.shape(), b.shape());
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  const auto& y = b.data();
  auto& z = out.data();
  if (same) {
    for (size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
  } else {
    int64_t n = a.dim(1);
    for (size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i % n];
  }
  if (should_record({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ta = a, tb = b;
    Tape::active().record([ta, tb, out, same]() mutable {
      const auto& dz = out.grad();
      if (ta.requires_grad()) {
        auto& da = ta.grad();
        for (size_t i = 0; i < dz.size(); ++i) da[i] += dz[i];
      }
      if (tb.requires_grad()) {
        auto& db = tb.grad();
        if (same) {
          for (size_t i = 0; i < dz.size(); ++i) db[i] += dz[i];
        } else {
          size_t n = db.size();
          for (size_t i = 0; i < dz.size(); ++i) db[i % n] += dz[i];
        }
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("sub", a.shape(), b.shape());
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  const auto& y = b.data();
  auto& z = out.data();
  for (size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
  if (should_record({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ta = a, tb = b;
    Tape::active().record([ta, tb, out]() mutable {
      const auto& dz = out.grad();
      if (ta.requires_grad()) {
        auto& da = ta.grad();
        for (size_t i = 0; i < dz.size(); ++i) da[i] += dz[i];
      }
      if (tb.requires_grad()) {
        auto& db = tb.grad();
        for (size_t i = 0; i < dz.size(); ++i) db[i] -= dz[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  bool same = a.shape() == b.shape();
  bool a_scalar = a.numel() == 1;
  bool b_scalar = b.numel() == 1;
  if (!same && !a_scalar && !b_scalar) mismatch("mul", a.shape(), b.shape());
  const Tensor& big = a_scalar && !same ? b : a;
  Tensor out = Tensor::zeros(big.shape());
  const auto& x = a.data();
  const auto& y = b.data();
  auto& z = out.data();
  if (same) {
    for (size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
  } else if (a_scalar) {
    for (size_t i = 0; i < z.size(); ++i) z[i] = x[0] * y[i];
  } else {
    for (size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[0];
  }
  if (should_record({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ta = a, tb = b;
    Tape::active().record([ta, tb, out, same, a_scalar]() mutable {
      const auto& dz = out.grad();
      const auto& x = ta.data();
      const auto& y = tb.data();
      if (ta.requires_grad()) {
        auto& da = ta.grad();
        if (same) {
          for (size_t i = 0; i < dz.size(); ++i) da[i] += dz[i] * y[i];
        } else if (a_scalar) {
          double acc = 0;
          for (size_t i = 0; i < dz.size(); ++i) acc += dz[i] * y[i];
          da[0] += acc;
        } else {
          for (size_t i = 0; i < dz.size(); ++i) da[i] += dz[i] * y[0];
        }
      }
      if (tb.requires_grad()) {
        auto& db = tb.grad();
        if (same) {
          for (size_t i = 0; i < dz.size(); ++i) db[i] += dz[i] * x[i];
        } else if (a_scalar) {
          for (size_t i = 0; i < dz.size(); ++i) db[i] += dz[i] * x[0];
        } else {
          double acc = 0;
          for (size_t i = 0; i < dz.size(); ++i) acc += dz[i] * x[i];
          db[0] += acc;
        }
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  return unary_op(
      a, [factor](double x) { return x * factor; },
      [factor](double, double, double dy) { return dy * factor; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a,
      [](double x) {
        return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
      },
      [](double, double y, double dy) { return dy * y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_op(a, [](double x) { return std::tanh(x); },
                  [](double, double y, double dy) { return dy * (1.0 - y * y); });
}

Tensor gelu(const Tensor& a) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  return unary_op(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [](double x, double, double dy) {
        double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        return dy * (cdf + x * pdf);
      });
}

Tensor exp(const Tensor& a) {
  return unary_op(a, [](double x) { return std::exp(x); },
                  [](double, double y, double dy) { return dy * y; });
}

Tensor log(const Tensor& a) {
  return unary_op(a, [](double x) { return std::log(x); },
                  [](double x, double, double dy) { return dy / x; });
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary_op(
      a, [floor](double x) { return x < floor ? floor : x; },
      [floor](double x, double, double dy) { return x < floor ? 0.0 : dy; });
}

Tensor softmax(const Tensor& a, int axis) {
  AxisView v = axis_view(a.shape(), axis);
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  auto& y = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    for (int64_t i = 0; i < v.inner; ++i) {
      auto at = [&](int64_t j) { return (o * v.len + j) * v.inner + i; };
      double mx = x[at(0)];
      for (int64_t j = 1; j < v.len; ++j) mx = std::max(mx, x[at(j)]);
      double denom = 0;
      for (int64_t j = 0; j < v.len; ++j) {
        double e = std::exp(x[at(j)] - mx);
        y[at(j)] = e;
        denom += e;
      }
      for (int64_t j = 0; j < v.len; ++j) y[at(j)] /= denom;
    }
  }
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, v]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      const auto& y = out.data();
      for (int64_t o = 0; o < v.outer; ++o) {
        for (int64_t i = 0; i < v.inner; ++i) {
          auto at = [&](int64_t j) { return (o * v.len + j) * v.inner + i; };
          double dot = 0;
          for (int64_t j = 0; j < v.len; ++j) dot += dy[at(j)] * y[at(j)];
          for (int64_t j = 0; j < v.len; ++j) {
            dx[at(j)] += y[at(j)] * (dy[at(j)] - dot);
          }
        }
      }
    });
  }
  return out;
}

Tensor log_softmax(const Tensor& a, int axis) {
  AxisView v = axis_view(a.shape(), axis);
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  auto& y = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    for (int64_t i = 0; i < v.inner; ++i) {
      auto at = [&](int64_t j) { return (o * v.len + j) * v.inner + i; };
      double mx = x[at(0)];
      for (int64_t j = 1; j < v.len; ++j) mx = std::max(mx, x[at(j)]);
      double denom = 0;
      for (int64_t j = 0; j < v.len; ++j) denom += std::exp(x[at(j)] - mx);
      double log_denom = mx + std::log(denom);
      for (int64_t j = 0; j < v.len; ++j) y[at(j)] = x[at(j)] - log_denom;
    }
  }
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, v]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      const auto& y = out.data();
      for (int64_t o = 0; o < v.outer; ++o) {
        for (int64_t i = 0; i < v.inner; ++i) {
          auto at = [&](int64_t j) { return (o * v.len + j) * v.inner + i; };
          double total = 0;
          for (int64_t j = 0; j < v.len; ++j) total += dy[at(j)];
          for (int64_t j = 0; j < v.len; ++j) {
            dx[at(j)] += dy[at(j)] - std::exp(y[at(j)]) * total;
          }
        }
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  if (x.rank() < 1) mismatch("layer_norm", x.shape(), gain.shape());
  int64_t width = x.shape().back();
  if (gain.numel() != width) mismatch("layer_norm gain", x.shape(), gain.shape());
  if (bias.numel() != width) mismatch("layer_norm bias", x.shape(), bias.shape());
  int64_t rows = x.numel() / width;

  Tensor out = Tensor::zeros(x.shape());
  std::vector<double> xhat(static_cast<size_t>(x.numel()));
  std::vector<double> inv_std(static_cast<size_t>(rows));
  const auto& px = x.data();
  const auto& pg = gain.data();
  const auto& pb = bias.data();
  auto& py = out.data();
  for (int64_t r = 0; r < rows; ++r) {
    const double* row = &px[r * width];
    double mu = 0;
    for (int64_t j = 0; j < width; ++j) mu += row[j];
    mu /= static_cast<double>(width);
    double var = 0;
    for (int64_t j = 0; j < width; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(width);
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (int64_t j = 0; j < width; ++j) {
      double xh = (row[j] - mu) * inv;
      xhat[r * width + j] = xh;
      py[r * width + j] = xh * pg[j] + pb[j];
    }
  }
  if (should_record({&x, &gain, &bias})) {
    out.set_requires_grad(true);
    Tensor tx = x, tg = gain, tb = bias;
    Tape::active().record(
        [tx, tg, tb, out, xhat = std::move(xhat), inv_std = std::move(inv_std),
         rows, width]() mutable {
          const auto& dy = out.grad();
          const auto& pg = tg.data();
          if (tg.requires_grad()) {
            auto& dg = tg.grad();
            for (int64_t r = 0; r < rows; ++r) {
              for (int64_t j = 0; j < width; ++j) {
                dg[j] += dy[r * width + j] * xhat[r * width + j];
              }
            }
          }
          if (tb.requires_grad()) {
            auto& db = tb.grad();
            for (int64_t r = 0; r < rows; ++r) {
              for (int64_t j = 0; j < width; ++j) db[j] += dy[r * width + j];
            }
          }
          if (tx.requires_grad()) {
            auto& dx = tx.grad();
            double w = static_cast<double>(width);
            for (int64_t r = 0; r < rows; ++r) {
              double m1 = 0, m2 = 0;
              for (int64_t j = 0; j < width; ++j) {
                double dxh = dy[r * width + j] * pg[j];
                m1 += dxh;
                m2 += dxh * xhat[r * width + j];
              }
              m1 /= w;
              m2 /= w;
              for (int64_t j = 0; j < width; ++j) {
                double dxh = dy[r * width + j] * pg[j];
                dx[r * width + j] +=
                    inv_std[r] * (dxh - m1 - xhat[r * width + j] * m2);
              }
            }
          }
        });
  }
  return out;
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int64_t>& ids) {
  if (table.rank() != 2) mismatch("embedding_lookup", table.shape(), {});
  int64_t v = table.dim(0), d = table.dim(1);
  for (int64_t id : ids) {
    if (id < 0 || id >= v) {
      throw ShapeMismatch("embedding_lookup: id " + std::to_string(id) +
                          " outside table " + shape_string(table.shape()));
    }
  }
  int64_t n = static_cast<int64_t>(ids.size());
  Tensor out = Tensor::zeros({n, d});
  const auto& src = table.data();
  auto& dst = out.data();
  for (int64_t i = 0; i < n; ++i) {
    std::copy_n(&src[ids[i] * d], d, &dst[i * d]);
  }
  if (should_record({&table})) {
    out.set_requires_grad(true);
    Tensor t = table;
    Tape::active().record([t, out, ids, d]() mutable {
      if (!t.requires_grad()) return;
      auto& dt = t.grad();
      const auto& dy = out.grad();
      for (size_t i = 0; i < ids.size(); ++i) {
        for (int64_t j = 0; j < d; ++j) dt[ids[i] * d + j] += dy[i * d + j];
      }
    });
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeMismatch("concat: no inputs");
  int ax = normalize_axis(parts[0].shape(), axis);
  Shape out_shape = parts[0].shape();
  for (size_t p = 1; p < parts.size(); ++p) {
    const Shape& s = parts[p].shape();
    if (s.size() != out_shape.size()) mismatch("concat", out_shape, s);
    for (size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != ax && s[i] != out_shape[i]) {
        mismatch("concat", parts[0].shape(), s);
      }
    }
    out_shape[ax] += s[ax];
  }
  Tensor out = Tensor::zeros(out_shape);
  AxisView vo = axis_view(out_shape, ax);
  auto& dst = out.data();
  int64_t offset = 0;
  std::vector<int64_t> offsets;
  for (const Tensor& part : parts) {
    offsets.push_back(offset);
    AxisView vp = axis_view(part.shape(), ax);
    const auto& src = part.data();
    for (int64_t o = 0; o < vp.outer; ++o) {
      std::copy_n(&src[o * vp.len * vp.inner], vp.len * vp.inner,
                  &dst[(o * vo.len + offset) * vo.inner]);
    }
    offset += vp.len;
  }
  bool any = false;
  for (const Tensor& part : parts) any = any || part.requires_grad();
  if (Tape::active().recording() && any) {
    out.set_requires_grad(true);
    std::vector<Tensor> inputs = parts;
    Tape::active().record([inputs, out, offsets, vo, ax]() mutable {
      const auto& dy = out.grad();
      for (size_t p = 0; p < inputs.size(); ++p) {
        if (!inputs[p].requires_grad()) continue;
        AxisView vp = axis_view(inputs[p].shape(), ax);
        auto& dx = inputs[p].grad();
        for (int64_t o = 0; o < vp.outer; ++o) {
          const double* block = &dy[(o * vo.len + offsets[p]) * vo.inner];
          double* target = &dx[o * vp.len * vp.inner];
          for (int64_t i = 0; i < vp.len * vp.inner; ++i) target[i] += block[i];
        }
      }
    });
  }
  return out;
}

Tensor slice(const Tensor& a, int axis, int64_t start, int64_t length) {
  int ax = normalize_axis(a.shape(), axis);
  if (start < 0 || length <= 0 || start + length > a.shape()[ax]) {
    throw ShapeMismatch("slice: range [" + std::to_string(start) + ", " +
                        std::to_string(start + length) + ") outside " +
                        shape_string(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[ax] = length;
  Tensor out = Tensor::zeros(out_shape);
  AxisView va = axis_view(a.shape(), ax);
  const auto& src = a.data();
  auto& dst = out.data();
  for (int64_t o = 0; o < va.outer; ++o) {
    std::copy_n(&src[(o * va.len + start) * va.inner], length * va.inner,
                &dst[o * length * va.inner]);
  }
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, va, start, length]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (int64_t o = 0; o < va.outer; ++o) {
        const double* block = &dy[o * length * va.inner];
        double* target = &dx[(o * va.len + start) * va.inner];
        for (int64_t i = 0; i < length * va.inner; ++i) target[i] += block[i];
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw ShapeMismatch("transpose expects rank 2, got " + shape_string(a.shape()));
  }
  int64_t m = a.dim(0), n = a.dim(1);
  Tensor out = Tensor::zeros({n, m});
  const auto& src = a.data();
  auto& dst = out.data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, m, n]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) dx[i * n + j] += dy[j * m + i];
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  check_shape_valid(shape);
  if (shape_numel(shape) != a.numel()) {
    mismatch("reshape", a.shape(), shape);
  }
  Tensor out = Tensor::from_vector(std::move(shape), a.data());
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
    });
  }
  return out;
}

Tensor masked_fill(const Tensor& a, const std::vector<uint8_t>& mask, double value) {
  if (static_cast<int64_t>(mask.size()) != a.numel()) {
    throw ShapeMismatch("masked_fill: mask size " + std::to_string(mask.size()) +
                        " vs tensor " + shape_string(a.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  auto& y = out.data();
  for (size_t i = 0; i < x.size(); ++i) y[i] = mask[i] ? value : x[i];
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, mask]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (size_t i = 0; i < dx.size(); ++i) {
        if (!mask[i]) dx[i] += dy[i];
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  Tensor out = Tensor::zeros({1});
  double acc = 0;
  for (double v : a.data()) acc += v;
  out.data()[0] = acc;
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      double dy = out.grad()[0];
      for (double& g : dx) g += dy;
    });
  }
  return out;
}

Tensor sum(const Tensor& a, int axis) {
  int ax = normalize_axis(a.shape(), axis);
  AxisView v = axis_view(a.shape(), ax);
  Shape out_shape;
  for (size_t i = 0; i < a.rank(); ++i) {
    if (static_cast<int>(i) != ax) out_shape.push_back(a.shape()[i]);
  }
  if (out_shape.empty()) out_shape = {1};
  Tensor out = Tensor::zeros(out_shape);
  const auto& x = a.data();
  auto& y = out.data();
  for (int64_t o = 0; o < v.outer; ++o) {
    for (int64_t j = 0; j < v.len; ++j) {
      for (int64_t i = 0; i < v.inner; ++i) {
        y[o * v.inner + i] += x[(o * v.len + j) * v.inner + i];
      }
    }
  }
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, v]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (int64_t o = 0; o < v.outer; ++o) {
        for (int64_t j = 0; j < v.len; ++j) {
          for (int64_t i = 0; i < v.inner; ++i) {
            dx[(o * v.len + j) * v.inner + i] += dy[o * v.inner + i];
          }
        }
      }
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor mean(const Tensor& a, int axis) {
  int ax = normalize_axis(a.shape(), axis);
  return scale(sum(a, ax), 1.0 / static_cast<double>(a.shape()[ax]));
}

Tensor gather(const Tensor& a, const std::vector<int64_t>& flat_indices) {
  if (flat_indices.empty()) throw ShapeMismatch("gather: empty index list");
  for (int64_t idx : flat_indices) {
    if (idx < 0 || idx >= a.numel()) {
      throw ShapeMismatch("gather: index " + std::to_string(idx) +
                          " outside tensor " + shape_string(a.shape()));
    }
  }
  int64_t n = static_cast<int64_t>(flat_indices.size());
  Tensor out = Tensor::zeros({n});
  auto& y = out.data();
  const auto& x = a.data();
  for (int64_t i = 0; i < n; ++i) y[i] = x[flat_indices[i]];
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, flat_indices]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (size_t i = 0; i < flat_indices.size(); ++i) {
        dx[flat_indices[i]] += dy[i];
      }
    });
  }
  return out;
}

Tensor scatter_add(const Tensor& values, const std::vector<int64_t>& indices,
                   int64_t out_size) {
  if (static_cast<int64_t>(indices.size()) != values.numel()) {
    throw ShapeMismatch("scatter_add: " + std::to_string(indices.size()) +
                        " indices vs values " + shape_string(values.shape()));
  }
  for (int64_t idx : indices) {
    if (idx >= out_size || idx < -1) {
      throw ShapeMismatch("scatter_add: index " + std::to_string(idx) +
                          " outside output of size " + std::to_string(out_size));
    }
  }
  Tensor out = Tensor::zeros({out_size});
  auto& y = out.data();
  const auto& x = values.data();
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= 0) y[indices[i]] += x[i];
  }
  if (should_record({&values})) {
    out.set_requires_grad(true);
    Tensor in = values;
    Tape::active().record([in, out, indices]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= 0) dx[i] += dy[indices[i]];
      }
    });
  }
  return out;
}

Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng, bool training) {
  if (!training || p <= 0.0) return a;
  if (p >= 1.0) throw Error("dropout probability must be < 1");
  double keep = 1.0 - p;
  std::vector<uint8_t> kept(static_cast<size_t>(a.numel()));
  for (auto& k : kept) {
    // 53-bit uniform in [0, 1); portable across standard library versions.
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    k = u < keep ? 1 : 0;
  }
  Tensor out = Tensor::zeros(a.shape());
  const auto& x = a.data();
  auto& y = out.data();
  double inv_keep = 1.0 / keep;
  for (size_t i = 0; i < x.size(); ++i) y[i] = kept[i] ? x[i] * inv_keep : 0.0;
  if (should_record({&a})) {
    out.set_requires_grad(true);
    Tensor in = a;
    Tape::active().record([in, out, kept = std::move(kept), inv_keep]() mutable {
      if (!in.requires_grad()) return;
      auto& dx = in.grad();
      const auto& dy = out.grad();
      for (size_t i = 0; i < dx.size(); ++i) {
        if (kept[i]) dx[i] += dy[i] * inv_keep;
      }
    });
  }
  return out;
}

}  // namespace ops

GradCheckReport grad_check(
    const std::function<Tensor()>& f,
    const std::vector<std::pair<std::string, Tensor>>& params, double eps,
    std::optional<size_t> max_elements_per_param, uint64_t sample_seed) {
  GradCheckReport report;

  // Analytic pass.
  for (const auto& [name, p] : params) {
    Tensor t = p;
    t.zero_grad();
  }
  Tape::active().clear();
  Tensor loss = f();
  Tape::active().backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, p] : params) {
    Tensor t = p;
    analytic.push_back(t.grad());
  }

  // Numeric pass.
  NoGradGuard no_grad;
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].second;
    auto& values = t.data();
    std::vector<int64_t> indices(values.size());
    std::iota(indices.begin(), indices.end(), 0);
    if (max_elements_per_param && indices.size() > *max_elements_per_param) {
      std::mt19937_64 rng(sample_seed ^ fnv1a64(params[k].first));
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(*max_elements_per_param);
    }
    GradCheckEntry entry;
    entry.name = params[k].first;
    for (int64_t idx : indices) {
      double original = values[idx];
      values[idx] = original + eps;
      double up = f().item();
      values[idx] = original - eps;
      double down = f().item();
      values[idx] = original;
      double numeric = (up - down) / (2.0 * eps);
      double a = analytic[k][idx];
      double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      double rel = std::fabs(a - numeric) / denom;
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
      entry.checked_elements += 1;
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace titlegen
