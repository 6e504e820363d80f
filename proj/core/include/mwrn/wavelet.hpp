#pragma once

#include "mwrn/tensor.hpp"

namespace mwrn {

// Orthonormal 2D Haar step on each 2x2 block [[a,b],[c,d]]:
//   LL=(a+b+c+d)/2, LH=(a-b+c-d)/2, HL=(a+b-c-d)/2, HH=(a-b-c+d)/2.
// Every input channel expands into four contiguous output channels in
// (LL, LH, HL, HH) order; spatial dims halve. The transform is orthogonal,
// so the backward pass is the inverse applied to the gradient.
template <typename T>
Tensor<T> dwt2(const Tensor<T>& input);

// Exact inverse of dwt2: channels shrink by 4, spatial dims double.
template <typename T>
Tensor<T> idwt2(const Tensor<T>& subbands);

// Coefficients of a full wavelet packet decomposition: `level` recursive
// dwt2 applications over every subband, giving 4^level channels per input
// channel at 1/2^level the spatial resolution.
template <typename T>
struct SubbandStack {
  int level = 0;
  Tensor<T> tensor;
};

template <typename T>
SubbandStack<T> wavelet_packet(const Tensor<T>& image, int level);

// Mirror extension on the right/bottom so both spatial dims become
// multiples of m; `crop` undoes it after inference.
struct CropRecord {
  std::int64_t height = 0;  // original dims
  std::int64_t width = 0;
};

template <typename T>
std::pair<Tensor<T>, CropRecord> reflect_pad_to_multiple(const Tensor<T>& image,
                                                         int m);

template <typename T>
Tensor<T> crop(const Tensor<T>& image, const CropRecord& record);

}  // namespace mwrn
