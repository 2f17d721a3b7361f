// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Double-precision compute kernels behind the network math. A portable
// scalar reference implementation always exists; AVX2 and AVX-512 variants
// are compiled separately and selected at runtime from CPU capabilities (or
// forced via the FTLAB_KERNELS environment variable). All variants are
// equivalence-tested against the scalar reference.

#pragma once

#include <cstddef>
#include <vector>

namespace ftlab::kern {

// Matrices are dense row-major. Dimensions follow C[M x N].
struct Ops {
  const char* name;

  // C = A * B           A[M x K], B[K x N]
  void (*gemm_nn)(const double* A, const double* B, double* C, int M, int N,
                  int K);
  // C = A * B^T         A[M x K], B[N x K]
  void (*gemm_nt)(const double* A, const double* B, double* C, int M, int N,
                  int K);
  // C = A^T * B         A[K x M], B[K x N]
  void (*gemm_tn)(const double* A, const double* B, double* C, int M, int N,
                  int K);

  // X[r][c] += bias[c]
  void (*add_bias)(double* X, const double* bias, int rows, int cols);
  // x = max(x, 0) elementwise
  void (*relu)(double* x, std::size_t n);
  // g[i] = pre[i] > 0 ? g[i] : 0
  void (*relu_mask)(const double* pre, double* g, std::size_t n);
  // out[c] = sum over rows of X[r][c]
  void (*col_sums)(const double* X, double* out, int rows, int cols);
  // grad[i] = 2 * (pred[i] - tgt[i]) * inv_count; returns sum of squared
  // residuals (unscaled).
  double (*mse_grad)(const double* pred, const double* tgt, double* grad,
                     std::size_t n, double inv_count);
  // Adam step with bias-corrected moments:
  //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
  //   w -= lr * (m*inv_bc1) / (sqrt(v*inv_bc2) + eps)
  void (*adam_update)(double* w, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double inv_bc1, double inv_bc2);
};

const Ops& scalar_ops();
const Ops* avx2_ops();    // nullptr when the CPU lacks AVX2+FMA
const Ops* avx512_ops();  // nullptr when the CPU lacks AVX-512F

/// The variant used by all library code. Chosen once: the widest supported
/// instruction set, unless FTLAB_KERNELS={scalar,avx2,avx512} overrides.
const Ops& active();

/// Every variant usable on this machine (for equivalence tests).
std::vector<const Ops*> supported_variants();

}  // namespace ftlab::kern
