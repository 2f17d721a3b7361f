// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. Plain loops, no intrinsics; the accumulation order per
// output element (ascending k) is shared by the vector variants so results
// differ only by FMA rounding.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ftlab/kernels.hpp"

namespace ftlab::kern {
namespace {

void gemm_nn(const double* A, const double* B, double* C, int M, int N,
             int K) {
  for (int i = 0; i < M; ++i) {
    double* c = C + static_cast<std::size_t>(i) * N;
    std::fill(c, c + N, 0.0);
    const double* a = A + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      const double aik = a[k];
      const double* b = B + static_cast<std::size_t>(k) * N;
      for (int j = 0; j < N; ++j) c[j] += aik * b[j];
    }
  }
}

void gemm_nt(const double* A, const double* B, double* C, int M, int N,
             int K) {
  for (int i = 0; i < M; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * K;
    double* c = C + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) {
      const double* b = B + static_cast<std::size_t>(j) * K;
      double acc = 0.0;
      for (int k = 0; k < K; ++k) acc += a[k] * b[k];
      c[j] = acc;
    }
  }
}

void gemm_tn(const double* A, const double* B, double* C, int M, int N,
             int K) {
  std::fill(C, C + static_cast<std::size_t>(M) * N, 0.0);
  for (int k = 0; k < K; ++k) {
    const double* a = A + static_cast<std::size_t>(k) * M;
    const double* b = B + static_cast<std::size_t>(k) * N;
    for (int i = 0; i < M; ++i) {
      const double aki = a[i];
      double* c = C + static_cast<std::size_t>(i) * N;
      for (int j = 0; j < N; ++j) c[j] += aki * b[j];
    }
  }
}

void add_bias(double* X, const double* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* x = X + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) x[c] += bias[c];
  }
}

void relu(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(const double* pre, double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(pre[i] > 0.0)) g[i] = 0.0;
}

void col_sums(const double* X, double* out, int rows, int cols) {
  std::fill(out, out + cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* x = X + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) out[c] += x[c];
  }
}

double mse_grad(const double* pred, const double* tgt, double* grad,
                std::size_t n, double inv_count) {
  double sse = 0.0;
  const double scale = 2.0 * inv_count;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - tgt[i];
    sse += d * d;
    grad[i] = scale * d;
  }
  return sse;
}

void adam_update(double* w, const double* g, double* m, double* v,
                 std::size_t n, double lr, double b1, double b2, double eps,
                 double inv_bc1, double inv_bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar", gemm_nn, gemm_nt,  gemm_tn,    add_bias,
      relu,     relu_mask, col_sums, mse_grad, adam_update,
  };
  return ops;
}

}  // namespace ftlab::kern
