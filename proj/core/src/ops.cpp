#include "mwrn/ops.hpp"

#include <cstring>

namespace mwrn {

using detail::make_op_result;
using detail::TensorNode;

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  const auto& in = *input.node();
  std::vector<T> out(in.values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = in.values[i] > T(0) ? in.values[i] : T(0);
  auto parent = input.node();
  return make_op_result<T>(
      "relu", in.shape, std::move(out), {parent},
      [parent](TensorNode<T>& self) {
        parent->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          if (parent->values[i] > T(0)) parent->grad[i] += self.grad[i];
      });
}

template <typename T>
Tensor<T> elementwise_add(const Tensor<T>& a, const Tensor<T>& b) {
  const auto& na = *a.node();
  const auto& nb = *b.node();
  if (!(na.shape == nb.shape))
    throw ShapeError("elementwise_add: shape mismatch " + na.shape.str() +
                     " vs " + nb.shape.str());
  std::vector<T> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = na.values[i] + nb.values[i];
  auto pa = a.node();
  auto pb = b.node();
  return make_op_result<T>(
      "elementwise_add", na.shape, std::move(out), {pa, pb},
      [pa, pb](TensorNode<T>& self) {
        for (auto& p : {pa, pb}) {
          if (!p->requires_grad) continue;
          p->ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i)
            p->grad[i] += self.grad[i];
        }
      });
}

template <typename T>
Tensor<T> scalar_mul(const Tensor<T>& a, T factor) {
  const auto& na = *a.node();
  std::vector<T> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] * factor;
  auto pa = a.node();
  return make_op_result<T>(
      "scalar_mul", na.shape, std::move(out), {pa},
      [pa, factor](TensorNode<T>& self) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          pa->grad[i] += self.grad[i] * factor;
      });
}

template <typename T>
Tensor<T> channel_concat(const Tensor<T>& a, const Tensor<T>& b) {
  const auto& na = *a.node();
  const auto& nb = *b.node();
  if (na.shape.b != nb.shape.b || na.shape.h != nb.shape.h ||
      na.shape.w != nb.shape.w)
    throw ShapeError("channel_concat: batch/spatial mismatch " +
                     na.shape.str() + " vs " + nb.shape.str());
  const Shape out_shape{na.shape.b, na.shape.c + nb.shape.c, na.shape.h,
                        na.shape.w};
  const std::int64_t hw = na.shape.hw();
  const std::int64_t ca = na.shape.c, cb = nb.shape.c;
  std::vector<T> out(static_cast<std::size_t>(out_shape.elems()));
  for (std::int64_t bi = 0; bi < out_shape.b; ++bi) {
    T* dst = out.data() + bi * out_shape.chw();
    std::memcpy(dst, na.values.data() + bi * ca * hw,
                static_cast<std::size_t>(ca * hw) * sizeof(T));
    std::memcpy(dst + ca * hw, nb.values.data() + bi * cb * hw,
                static_cast<std::size_t>(cb * hw) * sizeof(T));
  }
  auto pa = a.node();
  auto pb = b.node();
  return make_op_result<T>(
      "channel_concat", out_shape, std::move(out), {pa, pb},
      [pa, pb, ca, cb, hw](TensorNode<T>& self) {
        for (std::int64_t bi = 0; bi < self.shape.b; ++bi) {
          const T* src = self.grad.data() + bi * self.shape.chw();
          if (pa->requires_grad) {
            pa->ensure_grad();
            T* g = pa->grad.data() + bi * ca * hw;
            for (std::int64_t i = 0; i < ca * hw; ++i) g[i] += src[i];
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            T* g = pb->grad.data() + bi * cb * hw;
            for (std::int64_t i = 0; i < cb * hw; ++i) g[i] += src[ca * hw + i];
          }
        }
      });
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& input) {
  const auto& in = *input.node();
  T acc = T(0);
  for (const T v : in.values) acc += v;
  auto parent = input.node();
  return make_op_result<T>(
      "sum_all", Shape{1, 1, 1, 1}, std::vector<T>{acc}, {parent},
      [parent](TensorNode<T>& self) {
        parent->ensure_grad();
        const T g = self.grad[0];
        for (auto& pg : parent->grad) pg += g;
      });
}

template <typename T>
Tensor<T> mse_half(const Tensor<T>& pred, const Tensor<T>& target) {
  const auto& np = *pred.node();
  const auto& nt = *target.node();
  if (!(np.shape == nt.shape))
    throw ShapeError("mse_half: shape mismatch " + np.shape.str() + " vs " +
                     nt.shape.str());
  if (nt.requires_grad)
    throw std::logic_error("mse_half: target must not require grad");
  const T inv_batch = T(1) / static_cast<T>(np.shape.b);
  T acc = T(0);
  for (std::size_t i = 0; i < np.values.size(); ++i) {
    const T d = np.values[i] - nt.values[i];
    acc += d * d;
  }
  acc = acc * T(0.5) * inv_batch;
  auto pp = pred.node();
  auto pt = target.node();
  return make_op_result<T>(
      "mse_half", Shape{1, 1, 1, 1}, std::vector<T>{acc}, {pp, pt},
      [pp, pt, inv_batch](TensorNode<T>& self) {
        pp->ensure_grad();
        const T g = self.grad[0] * inv_batch;
        for (std::size_t i = 0; i < pp->values.size(); ++i)
          pp->grad[i] += g * (pp->values[i] - pt->values[i]);
      });
}

#define MWRN_INSTANTIATE(T)                                                  \
  template Tensor<T> relu<T>(const Tensor<T>&);                             \
  template Tensor<T> elementwise_add<T>(const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> scalar_mul<T>(const Tensor<T>&, T);                     \
  template Tensor<T> channel_concat<T>(const Tensor<T>&, const Tensor<T>&);  \
  template Tensor<T> sum_all<T>(const Tensor<T>&);                           \
  template Tensor<T> mse_half<T>(const Tensor<T>&, const Tensor<T>&);

MWRN_INSTANTIATE(float)
MWRN_INSTANTIATE(double)
#undef MWRN_INSTANTIATE

}  // namespace mwrn
