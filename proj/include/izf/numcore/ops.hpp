#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "izf/numcore/tensor.hpp"

namespace izf::numcore {

inline constexpr double kDefaultLeakySlope = 0.01;

// Elementwise binary ops broadcast numpy-style (right-aligned, size-1 axes
// stretch).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);
Tensor tanh(const Tensor& x);
// max(x, slope*x); the gradient at x == 0 takes the positive branch.
Tensor leaky_relu(const Tensor& x, double slope = kDefaultLeakySlope);

Tensor sum(const Tensor& x);
// Sum over one axis of a rank-2 tensor, keeping the axis with size 1.
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::size_t axis);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

// Pairwise squared Euclidean distances between the rows of a (n x d) and
// b (m x d); result is n x m.
Tensor sqdist(const Tensor& a, const Tensor& b);

// Column manipulation on rank-2 tensors.
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// out[:, j] = x[:, index[j]]
Tensor gather_cols(const Tensor& x, std::span<const std::size_t> index);

// Mean softmax cross-entropy of logits (n x k) against integer targets.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator*(const Tensor& x, double f) { return scale(x, f); }
inline Tensor operator*(double f, const Tensor& x) { return scale(x, f); }
inline Tensor operator+(const Tensor& x, double v) { return add_scalar(x, v); }
inline Tensor operator-(const Tensor& x, double v) { return add_scalar(x, -v); }

}  // namespace izf::numcore
