#pragma once

#include "symmatch/autodiff/tensor.hpp"

namespace symmatch::autodiff {

// Matrix product [p x q] * [q x r] -> [p x r].
Tensor matmul(const Tensor& a, const Tensor& b);

// Row-wise softmax of logits / tau, computed with max subtraction. Every
// output row sums to 1. tau must be positive.
Tensor row_softmax(const Tensor& logits, double tau);

Tensor relu(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor transpose(const Tensor& a);

// Adds a 1 x d bias row to every row of a n x d tensor.
Tensor add_row_bias(const Tensor& a, const Tensor& bias);

// [n x p], [n x q] -> [n x (p+q)].
Tensor concat_cols(const Tensor& a, const Tensor& b);

// Repeats a 1 x d row n times.
Tensor repeat_rows(const Tensor& row, int n);

// Per-column max over rows, n x d -> 1 x d. Backward routes the gradient to
// the argmax row of each column; ties break to the lowest row index.
Tensor global_max_pool(const Tensor& a);

// out[i, :] = a[index[i], :]. Realizes a 0/1 selection matrix acting from the
// left without materializing it. index entries are rows of `a`; they may
// repeat (backward scatter-adds).
Tensor gather_rows(const Tensor& a, const std::vector<int>& index);

// out[:, index[j]] += a[:, j]. Realizes right-multiplication by the 0/1
// matrix P with P(j, index[j]) = 1; columns never hit by `index` stay zero.
Tensor scatter_cols(const Tensor& a, const std::vector<int>& index);

// Sum of squared entries -> scalar.
Tensor frobenius_sq(const Tensor& a);

// Sum of all entries -> scalar.
Tensor sum_all(const Tensor& a);

// sqrt(x + eps) on a scalar; smooth Frobenius norm when fed frobenius_sq.
Tensor sqrt_eps(const Tensor& a, double eps);

}  // namespace symmatch::autodiff
