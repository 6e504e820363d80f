#include "mwrn/wavelet.hpp"

#include <cstring>

namespace mwrn {

using detail::make_op_result;
using detail::TensorNode;

namespace {

// Raw kernels shared by forward values and backward passes.
template <typename T>
void dwt2_raw(const T* src, std::int64_t c, std::int64_t h, std::int64_t w,
              T* dst) {
  const std::int64_t h2 = h / 2, w2 = w / 2;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const T* plane = src + ch * h * w;
    T* ll = dst + (ch * 4 + 0) * h2 * w2;
    T* lh = dst + (ch * 4 + 1) * h2 * w2;
    T* hl = dst + (ch * 4 + 2) * h2 * w2;
    T* hh = dst + (ch * 4 + 3) * h2 * w2;
    for (std::int64_t y = 0; y < h2; ++y) {
      const T* r0 = plane + (2 * y) * w;
      const T* r1 = plane + (2 * y + 1) * w;
      for (std::int64_t x = 0; x < w2; ++x) {
        const T a = r0[2 * x], b = r0[2 * x + 1];
        const T cc = r1[2 * x], d = r1[2 * x + 1];
        const std::int64_t i = y * w2 + x;
        ll[i] = (a + b + cc + d) * T(0.5);
        lh[i] = (a - b + cc - d) * T(0.5);
        hl[i] = (a + b - cc - d) * T(0.5);
        hh[i] = (a - b - cc + d) * T(0.5);
      }
    }
  }
}

template <typename T>
void idwt2_raw(const T* src, std::int64_t c4, std::int64_t h2, std::int64_t w2,
               T* dst) {
  const std::int64_t c = c4 / 4;
  const std::int64_t h = h2 * 2, w = w2 * 2;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const T* ll = src + (ch * 4 + 0) * h2 * w2;
    const T* lh = src + (ch * 4 + 1) * h2 * w2;
    const T* hl = src + (ch * 4 + 2) * h2 * w2;
    const T* hh = src + (ch * 4 + 3) * h2 * w2;
    T* plane = dst + ch * h * w;
    for (std::int64_t y = 0; y < h2; ++y) {
      T* r0 = plane + (2 * y) * w;
      T* r1 = plane + (2 * y + 1) * w;
      for (std::int64_t x = 0; x < w2; ++x) {
        const std::int64_t i = y * w2 + x;
        const T s = ll[i], dh = lh[i], dv = hl[i], dd = hh[i];
        r0[2 * x] = (s + dh + dv + dd) * T(0.5);
        r0[2 * x + 1] = (s - dh + dv - dd) * T(0.5);
        r1[2 * x] = (s + dh - dv - dd) * T(0.5);
        r1[2 * x + 1] = (s - dh - dv + dd) * T(0.5);
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> dwt2(const Tensor<T>& input) {
  const auto& in = *input.node();
  if (in.shape.h % 2 != 0 || in.shape.w % 2 != 0)
    throw ShapeError("dwt2: spatial dims must be even, got " + in.shape.str());
  const Shape out_shape{in.shape.b, in.shape.c * 4, in.shape.h / 2,
                        in.shape.w / 2};
  std::vector<T> out(static_cast<std::size_t>(out_shape.elems()));
  for (std::int64_t bi = 0; bi < in.shape.b; ++bi)
    dwt2_raw(in.values.data() + bi * in.shape.chw(), in.shape.c, in.shape.h,
             in.shape.w, out.data() + bi * out_shape.chw());
  auto parent = input.node();
  return make_op_result<T>(
      "dwt2", out_shape, std::move(out), {parent},
      [parent](TensorNode<T>& self) {
        parent->ensure_grad();
        const Shape& ps = parent->shape;
        std::vector<T> buf(static_cast<std::size_t>(ps.chw()));
        for (std::int64_t bi = 0; bi < ps.b; ++bi) {
          idwt2_raw(self.grad.data() + bi * self.shape.chw(), self.shape.c,
                    self.shape.h, self.shape.w, buf.data());
          T* g = parent->grad.data() + bi * ps.chw();
          for (std::int64_t i = 0; i < ps.chw(); ++i) g[i] += buf[i];
        }
      });
}

template <typename T>
Tensor<T> idwt2(const Tensor<T>& subbands) {
  const auto& in = *subbands.node();
  if (in.shape.c % 4 != 0)
    throw ShapeError("idwt2: channels must be divisible by 4, got " +
                     in.shape.str());
  const Shape out_shape{in.shape.b, in.shape.c / 4, in.shape.h * 2,
                        in.shape.w * 2};
  std::vector<T> out(static_cast<std::size_t>(out_shape.elems()));
  for (std::int64_t bi = 0; bi < in.shape.b; ++bi)
    idwt2_raw(in.values.data() + bi * in.shape.chw(), in.shape.c, in.shape.h,
              in.shape.w, out.data() + bi * out_shape.chw());
  auto parent = subbands.node();
  return make_op_result<T>(
      "idwt2", out_shape, std::move(out), {parent},
      [parent](TensorNode<T>& self) {
        parent->ensure_grad();
        const Shape& ps = parent->shape;
        std::vector<T> buf(static_cast<std::size_t>(ps.chw()));
        for (std::int64_t bi = 0; bi < ps.b; ++bi) {
          dwt2_raw(self.grad.data() + bi * self.shape.chw(), self.shape.c,
                   self.shape.h, self.shape.w, buf.data());
          T* g = parent->grad.data() + bi * ps.chw();
          for (std::int64_t i = 0; i < ps.chw(); ++i) g[i] += buf[i];
        }
      });
}

template <typename T>
SubbandStack<T> wavelet_packet(const Tensor<T>& image, int level) {
  if (level < 1 || level > 3)
    throw ShapeError("wavelet_packet: level must be in {1,2,3}, got " +
                     std::to_string(level));
  const std::int64_t div = std::int64_t(1) << level;
  if (image.shape().h % div != 0 || image.shape().w % div != 0)
    throw ShapeError("wavelet_packet: dims " + image.shape().str() +
                     " not divisible by " + std::to_string(div));
  // dwt2 already expands every channel, so recursing over all subbands is
  // simply repeated application.
  Tensor<T> t = image;
  for (int l = 0; l < level; ++l) t = dwt2(t);
  return SubbandStack<T>{level, std::move(t)};
}

namespace {
// Triangle-wave mirror of i onto [0, n); handles n == 1 and any pad length.
std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  std::int64_t j = i % period;
  if (j < 0) j += period;
  return j < n ? j : period - j;
}
}  // namespace

template <typename T>
std::pair<Tensor<T>, CropRecord> reflect_pad_to_multiple(const Tensor<T>& image,
                                                         int m) {
  if (m < 1) throw ShapeError("reflect_pad_to_multiple: m must be >= 1");
  const Shape s = image.shape();
  const std::int64_t ph = (s.h + m - 1) / m * m;
  const std::int64_t pw = (s.w + m - 1) / m * m;
  CropRecord record{s.h, s.w};
  if (ph == s.h && pw == s.w) return {image, record};
  Tensor<T> out = Tensor<T>::zeros({s.b, s.c, ph, pw});
  auto dst = out.raw_data();
  const auto src = image.data();
  for (std::int64_t bi = 0; bi < s.b; ++bi) {
    for (std::int64_t ch = 0; ch < s.c; ++ch) {
      const T* p = src.data() + (bi * s.c + ch) * s.hw();
      T* o = dst.data() + (bi * s.c + ch) * ph * pw;
      for (std::int64_t y = 0; y < ph; ++y) {
        const std::int64_t sy = mirror_index(y, s.h);
        for (std::int64_t x = 0; x < pw; ++x)
          o[y * pw + x] = p[sy * s.w + mirror_index(x, s.w)];
      }
    }
  }
  return {std::move(out), record};
}

template <typename T>
Tensor<T> crop(const Tensor<T>& image, const CropRecord& record) {
  const Shape s = image.shape();
  if (record.height > s.h || record.width > s.w)
    throw ShapeError("crop: record " + std::to_string(record.height) + "x" +
                     std::to_string(record.width) + " exceeds " + s.str());
  if (record.height == s.h && record.width == s.w) return image;
  Tensor<T> out = Tensor<T>::zeros({s.b, s.c, record.height, record.width});
  auto dst = out.raw_data();
  const auto src = image.data();
  for (std::int64_t bi = 0; bi < s.b; ++bi)
    for (std::int64_t ch = 0; ch < s.c; ++ch)
      for (std::int64_t y = 0; y < record.height; ++y)
        std::memcpy(
            dst.data() + ((bi * s.c + ch) * record.height + y) * record.width,
            src.data() + (bi * s.c + ch) * s.hw() + y * s.w,
            static_cast<std::size_t>(record.width) * sizeof(T));
  return out;
}

#define MWRN_INSTANTIATE(T)                                              \
  template Tensor<T> dwt2<T>(const Tensor<T>&);                          \
  template Tensor<T> idwt2<T>(const Tensor<T>&);                         \
  template SubbandStack<T> wavelet_packet<T>(const Tensor<T>&, int);     \
  template std::pair<Tensor<T>, CropRecord> reflect_pad_to_multiple<T>(  \
      const Tensor<T>&, int);                                            \
  template Tensor<T> crop<T>(const Tensor<T>&, const CropRecord&);

MWRN_INSTANTIATE(float)
MWRN_INSTANTIATE(double)
#undef MWRN_INSTANTIATE

}  // namespace mwrn
