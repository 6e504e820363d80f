#include <cmath>
#include <vector>

#include "mwrn/ops.hpp"

namespace mwrn {

using detail::make_op_result;
using detail::TensorNode;

// Statistics are accumulated in double (fixed order) regardless of the
// element type; population variance convention in training mode.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, const Tensor<T>& gamma,
                     const Tensor<T>& beta, Tensor<T>& running_mean,
                     Tensor<T>& running_var, bool training, double epsilon,
                     double momentum) {
  const auto& in = *input.node();
  const std::int64_t batch = in.shape.b, c = in.shape.c;
  const std::int64_t hw = in.shape.hw();
  const std::int64_t n = batch * hw;  // samples per channel
  const Shape param_shape{1, c, 1, 1};
  if (!(gamma.shape() == param_shape) || !(beta.shape() == param_shape) ||
      !(running_mean.shape() == param_shape) ||
      !(running_var.shape() == param_shape))
    throw ShapeError("batch_norm: per-channel params must be (1," +
                     std::to_string(c) + ",1,1)");
  if (training && n < 2)
    throw ShapeError("batch_norm: training mode needs batch*h*w >= 2, got " +
                     std::to_string(n));

  std::vector<T> mean(static_cast<std::size_t>(c));
  std::vector<T> inv_std(static_cast<std::size_t>(c));
  if (training) {
    auto rm = running_mean.raw_data();
    auto rv = running_var.raw_data();
    for (std::int64_t ch = 0; ch < c; ++ch) {
      double sum = 0.0;
      for (std::int64_t bi = 0; bi < batch; ++bi) {
        const T* p = in.values.data() + (bi * c + ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) sum += p[i];
      }
      const double mu = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::int64_t bi = 0; bi < batch; ++bi) {
        const T* p = in.values.data() + (bi * c + ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) {
          const double d = static_cast<double>(p[i]) - mu;
          ss += d * d;
        }
      }
      const double var = ss / static_cast<double>(n);
      mean[ch] = static_cast<T>(mu);
      inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + epsilon));
      rm[ch] = static_cast<T>(momentum * rm[ch] + (1.0 - momentum) * mu);
      rv[ch] = static_cast<T>(momentum * rv[ch] + (1.0 - momentum) * var);
    }
  } else {
    const auto rm = running_mean.data();
    const auto rv = running_var.data();
    for (std::int64_t ch = 0; ch < c; ++ch) {
      mean[ch] = rm[ch];
      inv_std[ch] = static_cast<T>(
          1.0 / std::sqrt(static_cast<double>(rv[ch]) + epsilon));
    }
  }

  const auto& g = gamma.node()->values;
  const auto& bt = beta.node()->values;
  std::vector<T> out(in.values.size());
  for (std::int64_t bi = 0; bi < batch; ++bi) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const T* p = in.values.data() + (bi * c + ch) * hw;
      T* o = out.data() + (bi * c + ch) * hw;
      const T a = g[ch] * inv_std[ch];
      const T b = bt[ch] - a * mean[ch];
      for (std::int64_t i = 0; i < hw; ++i) o[i] = a * p[i] + b;
    }
  }

  auto pin = input.node();
  auto pg = gamma.node();
  auto pb = beta.node();
  return make_op_result<T>(
      "batch_norm", in.shape, std::move(out), {pin, pg, pb},
      [pin, pg, pb, mean = std::move(mean), inv_std = std::move(inv_std),
       batch, c, hw, n, training](TensorNode<T>& self) {
        // Per channel: dxhat = dy*gamma; in training mode the batch
        // statistics also carry gradient.
        for (std::int64_t ch = 0; ch < c; ++ch) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::int64_t bi = 0; bi < batch; ++bi) {
            const T* dy = self.grad.data() + (bi * c + ch) * hw;
            const T* x = pin->values.data() + (bi * c + ch) * hw;
            for (std::int64_t i = 0; i < hw; ++i) {
              const double xhat =
                  (static_cast<double>(x[i]) - mean[ch]) * inv_std[ch];
              sum_dy += dy[i];
              sum_dy_xhat += static_cast<double>(dy[i]) * xhat;
            }
          }
          if (pg->requires_grad) {
            pg->ensure_grad();
            pg->grad[ch] += static_cast<T>(sum_dy_xhat);
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            pb->grad[ch] += static_cast<T>(sum_dy);
          }
          if (!pin->requires_grad) continue;
          pin->ensure_grad();
          const double gam = pg->values[ch];
          const double istd = inv_std[ch];
          if (training) {
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::int64_t bi = 0; bi < batch; ++bi) {
              const T* dy = self.grad.data() + (bi * c + ch) * hw;
              const T* x = pin->values.data() + (bi * c + ch) * hw;
              T* dx = pin->grad.data() + (bi * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                const double xhat =
                    (static_cast<double>(x[i]) - mean[ch]) * istd;
                const double term = static_cast<double>(dy[i]) -
                                    inv_n * sum_dy - inv_n * xhat * sum_dy_xhat;
                dx[i] += static_cast<T>(gam * istd * term);
              }
            }
          } else {
            const double scale = gam * istd;
            for (std::int64_t bi = 0; bi < batch; ++bi) {
              const T* dy = self.grad.data() + (bi * c + ch) * hw;
              T* dx = pin->grad.data() + (bi * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i)
                dx[i] += static_cast<T>(scale * dy[i]);
            }
          }
        }
      });
}

template Tensor<float> batch_norm<float>(const Tensor<float>&,
                                         const Tensor<float>&,
                                         const Tensor<float>&, Tensor<float>&,
                                         Tensor<float>&, bool, double, double);
template Tensor<double> batch_norm<double>(const Tensor<double>&,
                                           const Tensor<double>&,
                                           const Tensor<double>&,
                                           Tensor<double>&, Tensor<double>&,
                                           bool, double, double);

}  // namespace mwrn
