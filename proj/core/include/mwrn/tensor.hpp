#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mwrn/errors.hpp"

namespace mwrn {

// Dense 4-D layout: (batch, channels, height, width), row-major, w fastest.
struct Shape {
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  std::int64_t elems() const { return b * c * h * w; }
  std::int64_t hw() const { return h * w; }
  std::int64_t chw() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until the first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), T(0));
  }
};

}  // namespace detail

// Reverse-mode autodiff is recorded only while grad mode is on; inference
// wraps calls in a NoGradGuard so no graph (and no activation copies) is kept.
bool grad_mode_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// When on, every op output is scanned for NaN/Inf and a NumericError is
// thrown naming the op. Off by default; the test harness switches it on.
void set_finite_check(bool on);
bool finite_check_enabled();

// Scalar element type is fixed at construction: instantiate with float for
// training/inference and double for gradient verification.
template <typename T>
class Tensor {
 public:
  using Node = detail::TensorNode<T>;

  Tensor() = default;

  static Tensor zeros(const Shape& s, bool requires_grad = false);
  static Tensor full(const Shape& s, T value);
  static Tensor from_data(const Shape& s, std::vector<T> values,
                          bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t size() const { return node_ ? node_->shape.elems() : 0; }

  std::span<const T> data() const { return node_->values; }
  // Leaf mutation only (parameters, buffers, test setup). Graph outputs are
  // immutable once written by an op.
  std::span<T> raw_data();

  T item() const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on);

  bool has_grad() const { return node_ && !node_->grad.empty(); }
  std::span<const T> grad() const;
  void zero_grad();

  // Reverse pass from a scalar. Accumulates into .grad of every reachable
  // tensor that requires grad.
  void backward();

  // Value copy without graph or gradient.
  Tensor detach() const;

  // --- internal plumbing for ops ---
  static Tensor adopt(std::shared_ptr<Node> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
  }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

namespace detail {

// Shared op epilogue: wires parents/backward only when grad is being
// recorded, and runs the finite-value scan when enabled.
template <typename T>
Tensor<T> make_op_result(
    const char* op, Shape shape, std::vector<T> values,
    std::vector<std::shared_ptr<TensorNode<T>>> parents,
    std::function<void(TensorNode<T>&)> backward_fn);

template <typename T>
void check_finite(const char* op, const std::vector<T>& values);

}  // namespace detail

}  // namespace mwrn
