#include <Eigen/Core>
#include <cstring>
#include <vector>

#include "mwrn/ops.hpp"

// GEMM-backed 3x3 convolution. Each batch item is lowered to a column
// matrix (im2col) and multiplied with the flattened kernel bank; batch items
// are processed in parallel with all writes disjoint and every reduction in
// a fixed order, so results are bitwise identical for any thread count.

namespace mwrn {
namespace {

template <typename T>
using MatRM =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// col is (in_c*9) x (h*w), row-major. Zero padding of 1 on every side.
template <typename T>
void im2col(const T* src, std::int64_t in_c, std::int64_t h, std::int64_t w,
            T* col) {
  const std::int64_t hw = h * w;
  for (std::int64_t ic = 0; ic < in_c; ++ic) {
    const T* plane = src + ic * hw;
    for (int kh = 0; kh < 3; ++kh) {
      for (int kw = 0; kw < 3; ++kw) {
        T* row = col + ((ic * 9) + kh * 3 + kw) * hw;
        for (std::int64_t oh = 0; oh < h; ++oh) {
          const std::int64_t ih = oh + kh - 1;
          T* dst = row + oh * w;
          if (ih < 0 || ih >= h) {
            std::memset(dst, 0, static_cast<std::size_t>(w) * sizeof(T));
            continue;
          }
          // iw = ow + kw - 1 must lie in [0, w).
          const std::int64_t ow_lo = std::max<std::int64_t>(0, 1 - kw);
          const std::int64_t ow_hi = std::min<std::int64_t>(w, w + 1 - kw);
          if (ow_lo > 0) dst[0] = T(0);
          if (ow_hi < w) dst[w - 1] = T(0);
          std::memcpy(dst + ow_lo, plane + ih * w + ow_lo + kw - 1,
                      static_cast<std::size_t>(ow_hi - ow_lo) * sizeof(T));
        }
      }
    }
  }
}

// Scatter-add of a column-matrix gradient back onto the input plane.
template <typename T>
void col2im_add(const T* col, std::int64_t in_c, std::int64_t h,
                std::int64_t w, T* dst) {
  const std::int64_t hw = h * w;
  for (std::int64_t ic = 0; ic < in_c; ++ic) {
    T* plane = dst + ic * hw;
    for (int kh = 0; kh < 3; ++kh) {
      for (int kw = 0; kw < 3; ++kw) {
        const T* row = col + ((ic * 9) + kh * 3 + kw) * hw;
        for (std::int64_t oh = 0; oh < h; ++oh) {
          const std::int64_t ih = oh + kh - 1;
          if (ih < 0 || ih >= h) continue;
          const std::int64_t ow_lo = std::max<std::int64_t>(0, 1 - kw);
          const std::int64_t ow_hi = std::min<std::int64_t>(w, w + 1 - kw);
          T* out_row = plane + ih * w + kw - 1;
          const T* in_row = row + oh * w;
          for (std::int64_t ow = ow_lo; ow < ow_hi; ++ow)
            out_row[ow] += in_row[ow];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  const auto& in = *input.node();
  const auto& wt = *weight.node();
  const auto& bs = *bias.node();
  const std::int64_t batch = in.shape.b, in_c = in.shape.c;
  const std::int64_t h = in.shape.h, w = in.shape.w;
  const std::int64_t out_c = wt.shape.b;
  if (wt.shape.h != 3 || wt.shape.w != 3)
    throw ShapeError("conv2d: kernel must be 3x3, got " + wt.shape.str());
  if (wt.shape.c != in_c)
    throw ShapeError("conv2d: weight expects " + std::to_string(wt.shape.c) +
                     " input channels, input has " + std::to_string(in_c));
  if (h <= 0 || w <= 0)
    throw ShapeError("conv2d: zero-sized spatial dims " + in.shape.str());
  if (!(bs.shape == Shape{1, out_c, 1, 1}))
    throw ShapeError("conv2d: bias must be (1," + std::to_string(out_c) +
                     ",1,1), got " + bs.shape.str());

  const std::int64_t hw = h * w;
  const std::int64_t k = in_c * 9;
  const Shape out_shape{batch, out_c, h, w};
  std::vector<T> out(static_cast<std::size_t>(out_shape.elems()));

  Eigen::Map<const MatRM<T>> wmat(wt.values.data(), out_c, k);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bs.values.data(),
                                                             out_c);
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < batch; ++bi) {
    std::vector<T> col(static_cast<std::size_t>(k * hw));
    im2col(in.values.data() + bi * in.shape.chw(), in_c, h, w, col.data());
    Eigen::Map<const MatRM<T>> cmat(col.data(), k, hw);
    Eigen::Map<MatRM<T>> omat(out.data() + bi * out_c * hw, out_c, hw);
    omat.noalias() = wmat * cmat;
    omat.colwise() += bvec;
  }

  auto pin = input.node();
  auto pw = weight.node();
  auto pb = bias.node();
  return detail::make_op_result<T>(
      "conv2d", out_shape, std::move(out), {pin, pw, pb},
      [pin, pw, pb, batch, in_c, out_c, h, w, hw,
       k](detail::TensorNode<T>& self) {
        Eigen::Map<const MatRM<T>> wmat(pw->values.data(), out_c, k);
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (std::int64_t oc = 0; oc < out_c; ++oc) {
            T acc = T(0);
            for (std::int64_t bi = 0; bi < batch; ++bi) {
              const T* g = self.grad.data() + (bi * out_c + oc) * hw;
              for (std::int64_t i = 0; i < hw; ++i) acc += g[i];
            }
            pb->grad[oc] += acc;
          }
        }
        if (pin->requires_grad) {
          pin->ensure_grad();
#pragma omp parallel for schedule(static)
          for (std::int64_t bi = 0; bi < batch; ++bi) {
            std::vector<T> dcol(static_cast<std::size_t>(k * hw));
            Eigen::Map<MatRM<T>> dcmat(dcol.data(), k, hw);
            Eigen::Map<const MatRM<T>> gmat(
                self.grad.data() + bi * out_c * hw, out_c, hw);
            dcmat.noalias() = wmat.transpose() * gmat;
            col2im_add(dcol.data(), in_c, h, w,
                       pin->grad.data() + bi * in_c * hw);
          }
        }
        if (pw->requires_grad) {
          pw->ensure_grad();
          // Per-item partial products, reduced in batch order so the sum
          // does not depend on the thread count.
          std::vector<T> partial(static_cast<std::size_t>(batch * out_c * k));
#pragma omp parallel for schedule(static)
          for (std::int64_t bi = 0; bi < batch; ++bi) {
            std::vector<T> col(static_cast<std::size_t>(k * hw));
            im2col(pin->values.data() + bi * in_c * hw, in_c, h, w,
                   col.data());
            Eigen::Map<const MatRM<T>> cmat(col.data(), k, hw);
            Eigen::Map<const MatRM<T>> gmat(
                self.grad.data() + bi * out_c * hw, out_c, hw);
            Eigen::Map<MatRM<T>> pmat(partial.data() + bi * out_c * k, out_c,
                                      k);
            pmat.noalias() = gmat * cmat.transpose();
          }
          for (std::int64_t bi = 0; bi < batch; ++bi) {
            const T* p = partial.data() + bi * out_c * k;
            for (std::int64_t i = 0; i < out_c * k; ++i) pw->grad[i] += p[i];
          }
        }
      });
}

template Tensor<float> conv2d<float>(const Tensor<float>&,
                                     const Tensor<float>&,
                                     const Tensor<float>&);
template Tensor<double> conv2d<double>(const Tensor<double>&,
                                       const Tensor<double>&,
                                       const Tensor<double>&);

}  // namespace mwrn
