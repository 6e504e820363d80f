#pragma once

#include "mwrn/tensor.hpp"

namespace mwrn {

// 3x3 convolution, stride 1, zero padding 1 (spatial dims preserved).
// weight is (out_c, in_c, 3, 3); bias is (1, out_c, 1, 1).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight,
                 const Tensor<T>& bias);

// Elementwise max(x, 0); the subgradient at 0 is taken as 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& input);

// Elementwise sum of equal-shaped tensors.
template <typename T>
Tensor<T> elementwise_add(const Tensor<T>& a, const Tensor<T>& b);

// Multiply by a compile-time-constant scalar (no gradient w.r.t. the factor).
template <typename T>
Tensor<T> scalar_mul(const Tensor<T>& a, T factor);

// Concatenate along the channel axis, a's channels first.
template <typename T>
Tensor<T> channel_concat(const Tensor<T>& a, const Tensor<T>& b);

// Sum of all elements, as a (1,1,1,1) tensor.
template <typename T>
Tensor<T> sum_all(const Tensor<T>& input);

// 0.5 * sum((pred - target)^2) / batch. Normalizing by batch size only keeps
// the learning-rate scale independent of batch size while leaving per-image
// loss values comparable across batch sizes. target must not require grad.
template <typename T>
Tensor<T> mse_half(const Tensor<T>& pred, const Tensor<T>& target);

// Batch normalization over (b, h, w) per channel. gamma/beta/running stats
// are (1, C, 1, 1). Training mode normalizes with batch statistics
// (population variance) and updates the running buffers in place with
// exponential decay `momentum`; eval mode normalizes with the running stats.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, const Tensor<T>& gamma,
                     const Tensor<T>& beta, Tensor<T>& running_mean,
                     Tensor<T>& running_var, bool training,
                     double epsilon = 1e-4, double momentum = 0.9);

}  // namespace mwrn
