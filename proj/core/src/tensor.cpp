#include "mwrn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace mwrn {

namespace {
thread_local bool g_grad_mode = true;
thread_local bool g_finite_check = false;
}  // namespace

bool grad_mode_enabled() { return g_grad_mode; }

NoGradGuard::NoGradGuard() : prev_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = prev_; }

void set_finite_check(bool on) { g_finite_check = on; }
bool finite_check_enabled() { return g_finite_check; }

std::string Shape::str() const {
  return "(" + std::to_string(b) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

template <typename T>
Tensor<T> Tensor<T>::zeros(const Shape& s, bool requires_grad) {
  if (s.b < 0 || s.c < 0 || s.h < 0 || s.w < 0)
    throw ShapeError("negative dimension in " + s.str());
  auto n = std::make_shared<Node>();
  n->shape = s;
  n->values.assign(static_cast<std::size_t>(s.elems()), T(0));
  n->requires_grad = requires_grad;
  return adopt(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::full(const Shape& s, T value) {
  Tensor t = zeros(s);
  std::fill(t.node_->values.begin(), t.node_->values.end(), value);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::from_data(const Shape& s, std::vector<T> values,
                               bool requires_grad) {
  if (static_cast<std::int64_t>(values.size()) != s.elems())
    throw ShapeError("data length " + std::to_string(values.size()) +
                     " does not match shape " + s.str());
  auto n = std::make_shared<Node>();
  n->shape = s;
  n->values = std::move(values);
  n->requires_grad = requires_grad;
  return adopt(std::move(n));
}

template <typename T>
std::span<T> Tensor<T>::raw_data() {
  if (!node_) throw ShapeError("raw_data on undefined tensor");
  if (node_->backward_fn)
    throw std::logic_error("raw_data: op outputs are immutable");
  return node_->values;
}

template <typename T>
T Tensor<T>::item() const {
  if (!node_ || node_->shape.elems() != 1)
    throw ShapeError("item() requires a single-element tensor");
  return node_->values[0];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  if (!node_) throw ShapeError("set_requires_grad on undefined tensor");
  if (node_->backward_fn)
    throw std::logic_error("set_requires_grad: only valid on leaves");
  node_->requires_grad = on;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!has_grad()) return {};
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (node_) node_->grad.clear();
}

template <typename T>
void Tensor<T>::backward() {
  if (!node_) throw ShapeError("backward on undefined tensor");
  if (node_->shape.elems() != 1)
    throw ShapeError("backward requires a scalar, got " + node_->shape.str());
  if (!node_->requires_grad)
    throw std::logic_error("backward: tensor does not require grad");

  // Iterative post-order DFS; reversing it gives a valid topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn && !(*it)->grad.empty()) (*it)->backward_fn(**it);
  }
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  if (!node_) return {};
  return from_data(node_->shape, node_->values, false);
}

namespace detail {

template <typename T>
void check_finite(const char* op, const std::vector<T>& values) {
  for (const T v : values) {
    if (!std::isfinite(static_cast<double>(v)))
      throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

template <typename T>
Tensor<T> make_op_result(
    const char* op, Shape shape, std::vector<T> values,
    std::vector<std::shared_ptr<TensorNode<T>>> parents,
    std::function<void(TensorNode<T>&)> backward_fn) {
  if (finite_check_enabled()) check_finite(op, values);
  auto n = std::make_shared<TensorNode<T>>();
  n->shape = shape;
  n->values = std::move(values);
  n->op = op;
  bool needs_grad = false;
  if (grad_mode_enabled()) {
    for (const auto& p : parents)
      if (p && p->requires_grad) needs_grad = true;
  }
  if (needs_grad) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor<T>::adopt(std::move(n));
}

template void check_finite<float>(const char*, const std::vector<float>&);
template void check_finite<double>(const char*, const std::vector<double>&);
template Tensor<float> make_op_result<float>(
    const char*, Shape, std::vector<float>,
    std::vector<std::shared_ptr<TensorNode<float>>>,
    std::function<void(TensorNode<float>&)>);
template Tensor<double> make_op_result<double>(
    const char*, Shape, std::vector<double>,
    std::vector<std::shared_ptr<TensorNode<double>>>,
    std::function<void(TensorNode<double>&)>);

}  // namespace detail

template class Tensor<float>;
template class Tensor<double>;

}  // namespace mwrn
