// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2+FMA kernel variant. Register-blocked microkernels: gemm_nn/gemm_tn
// broadcast one operand and stream the other 4-wide, keeping a 4x8 tile of C
// in registers across the whole reduction; gemm_nt reduces four dot products
// at a time. Per-element accumulation order matches the scalar reference, so
// the only divergence is FMA rounding.

#include "ftlab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ftlab::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// --- C = A * B ------------------------------------------------------------

inline void nn_rows4(const double* A, const double* B, double* C, int i0,
                     int N, int K) {
  const double* a0 = A + static_cast<std::size_t>(i0 + 0) * K;
  const double* a1 = A + static_cast<std::size_t>(i0 + 1) * K;
  const double* a2 = A + static_cast<std::size_t>(i0 + 2) * K;
  const double* a3 = A + static_cast<std::size_t>(i0 + 3) * K;
  double* c0 = C + static_cast<std::size_t>(i0 + 0) * N;
  double* c1 = C + static_cast<std::size_t>(i0 + 1) * N;
  double* c2 = C + static_cast<std::size_t>(i0 + 2) * N;
  double* c3 = C + static_cast<std::size_t>(i0 + 3) * N;

  int j = 0;
  for (; j + 8 <= N; j += 8) {
    __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd();
    __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd();
    __m256d s20 = _mm256_setzero_pd(), s21 = _mm256_setzero_pd();
    __m256d s30 = _mm256_setzero_pd(), s31 = _mm256_setzero_pd();
    for (int k = 0; k < K; ++k) {
      const double* b = B + static_cast<std::size_t>(k) * N + j;
      const __m256d b0 = _mm256_loadu_pd(b);
      const __m256d b1 = _mm256_loadu_pd(b + 4);
      __m256d av;
      av = _mm256_set1_pd(a0[k]);
      s00 = _mm256_fmadd_pd(av, b0, s00);
      s01 = _mm256_fmadd_pd(av, b1, s01);
      av = _mm256_set1_pd(a1[k]);
      s10 = _mm256_fmadd_pd(av, b0, s10);
      s11 = _mm256_fmadd_pd(av, b1, s11);
      av = _mm256_set1_pd(a2[k]);
      s20 = _mm256_fmadd_pd(av, b0, s20);
      s21 = _mm256_fmadd_pd(av, b1, s21);
      av = _mm256_set1_pd(a3[k]);
      s30 = _mm256_fmadd_pd(av, b0, s30);
      s31 = _mm256_fmadd_pd(av, b1, s31);
    }
    _mm256_storeu_pd(c0 + j, s00);
    _mm256_storeu_pd(c0 + j + 4, s01);
    _mm256_storeu_pd(c1 + j, s10);
    _mm256_storeu_pd(c1 + j + 4, s11);
    _mm256_storeu_pd(c2 + j, s20);
    _mm256_storeu_pd(c2 + j + 4, s21);
    _mm256_storeu_pd(c3 + j, s30);
    _mm256_storeu_pd(c3 + j + 4, s31);
  }
  for (; j + 4 <= N; j += 4) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    for (int k = 0; k < K; ++k) {
      const __m256d b0 = _mm256_loadu_pd(B + static_cast<std::size_t>(k) * N + j);
      s0 = _mm256_fmadd_pd(_mm256_set1_pd(a0[k]), b0, s0);
      s1 = _mm256_fmadd_pd(_mm256_set1_pd(a1[k]), b0, s1);
      s2 = _mm256_fmadd_pd(_mm256_set1_pd(a2[k]), b0, s2);
      s3 = _mm256_fmadd_pd(_mm256_set1_pd(a3[k]), b0, s3);
    }
    _mm256_storeu_pd(c0 + j, s0);
    _mm256_storeu_pd(c1 + j, s1);
    _mm256_storeu_pd(c2 + j, s2);
    _mm256_storeu_pd(c3 + j, s3);
  }
  for (; j < N; ++j) {
    double r0 = 0.0, r1 = 0.0, r2 = 0.0, r3 = 0.0;
    for (int k = 0; k < K; ++k) {
      const double bkj = B[static_cast<std::size_t>(k) * N + j];
      r0 += a0[k] * bkj;
      r1 += a1[k] * bkj;
      r2 += a2[k] * bkj;
      r3 += a3[k] * bkj;
    }
    c0[j] = r0;
    c1[j] = r1;
    c2[j] = r2;
    c3[j] = r3;
  }
}

inline void nn_row1(const double* A, const double* B, double* C, int i, int N,
                    int K) {
  const double* a = A + static_cast<std::size_t>(i) * K;
  double* c = C + static_cast<std::size_t>(i) * N;
  int j = 0;
  for (; j + 8 <= N; j += 8) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    for (int k = 0; k < K; ++k) {
      const double* b = B + static_cast<std::size_t>(k) * N + j;
      const __m256d av = _mm256_set1_pd(a[k]);
      s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b), s0);
      s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 4), s1);
    }
    _mm256_storeu_pd(c + j, s0);
    _mm256_storeu_pd(c + j + 4, s1);
  }
  for (; j + 4 <= N; j += 4) {
    __m256d s0 = _mm256_setzero_pd();
    for (int k = 0; k < K; ++k)
      s0 = _mm256_fmadd_pd(
          _mm256_set1_pd(a[k]),
          _mm256_loadu_pd(B + static_cast<std::size_t>(k) * N + j), s0);
    _mm256_storeu_pd(c + j, s0);
  }
  for (; j < N; ++j) {
    double r = 0.0;
    for (int k = 0; k < K; ++k)
      r += a[k] * B[static_cast<std::size_t>(k) * N + j];
    c[j] = r;
  }
}

void gemm_nn(const double* A, const double* B, double* C, int M, int N,
             int K) {
  int i = 0;
  for (; i + 4 <= M; i += 4) nn_rows4(A, B, C, i, N, K);
  for (; i < M; ++i) nn_row1(A, B, C, i, N, K);
}

// --- C = A * B^T ------------------------------------------------------------

void gemm_nt(const double* A, const double* B, double* C, int M, int N,
             int K) {
  const int k4 = K - K % 4;
  for (int i = 0; i < M; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * K;
    double* c = C + static_cast<std::size_t>(i) * N;
    int j = 0;
    for (; j + 4 <= N; j += 4) {
      const double* b0 = B + static_cast<std::size_t>(j + 0) * K;
      const double* b1 = B + static_cast<std::size_t>(j + 1) * K;
      const double* b2 = B + static_cast<std::size_t>(j + 2) * K;
      const double* b3 = B + static_cast<std::size_t>(j + 3) * K;
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
      for (int k = 0; k < k4; k += 4) {
        const __m256d x = _mm256_loadu_pd(a + k);
        s0 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b0 + k), s0);
        s1 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b1 + k), s1);
        s2 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b2 + k), s2);
        s3 = _mm256_fmadd_pd(x, _mm256_loadu_pd(b3 + k), s3);
      }
      // transpose-reduce the four partial vectors into one result vector
      const __m256d t0 = _mm256_hadd_pd(s0, s1);
      const __m256d t1 = _mm256_hadd_pd(s2, s3);
      const __m256d lo = _mm256_permute2f128_pd(t0, t1, 0x20);
      const __m256d hi = _mm256_permute2f128_pd(t0, t1, 0x31);
      __m256d sums = _mm256_add_pd(lo, hi);
      if (k4 < K) {
        alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
        for (int k = k4; k < K; ++k) {
          tail[0] += a[k] * b0[k];
          tail[1] += a[k] * b1[k];
          tail[2] += a[k] * b2[k];
          tail[3] += a[k] * b3[k];
        }
        sums = _mm256_add_pd(sums, _mm256_load_pd(tail));
      }
      _mm256_storeu_pd(c + j, sums);
    }
    for (; j < N; ++j) {
      const double* b = B + static_cast<std::size_t>(j) * K;
      __m256d s = _mm256_setzero_pd();
      for (int k = 0; k < k4; k += 4)
        s = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), s);
      double r = hsum(s);
      for (int k = k4; k < K; ++k) r += a[k] * b[k];
      c[j] = r;
    }
  }
}

// --- C = A^T * B ------------------------------------------------------------

inline void tn_rows4(const double* A, const double* B, double* C, int i0,
                     int M, int N, int K) {
  double* c0 = C + static_cast<std::size_t>(i0 + 0) * N;
  double* c1 = C + static_cast<std::size_t>(i0 + 1) * N;
  double* c2 = C + static_cast<std::size_t>(i0 + 2) * N;
  double* c3 = C + static_cast<std::size_t>(i0 + 3) * N;

  int j = 0;
  for (; j + 8 <= N; j += 8) {
    __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd();
    __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd();
    __m256d s20 = _mm256_setzero_pd(), s21 = _mm256_setzero_pd();
    __m256d s30 = _mm256_setzero_pd(), s31 = _mm256_setzero_pd();
    for (int k = 0; k < K; ++k) {
      const double* ak = A + static_cast<std::size_t>(k) * M + i0;
      const double* bk = B + static_cast<std::size_t>(k) * N + j;
      const __m256d b0 = _mm256_loadu_pd(bk);
      const __m256d b1 = _mm256_loadu_pd(bk + 4);
      __m256d av;
      av = _mm256_set1_pd(ak[0]);
      s00 = _mm256_fmadd_pd(av, b0, s00);
      s01 = _mm256_fmadd_pd(av, b1, s01);
      av = _mm256_set1_pd(ak[1]);
      s10 = _mm256_fmadd_pd(av, b0, s10);
      s11 = _mm256_fmadd_pd(av, b1, s11);
      av = _mm256_set1_pd(ak[2]);
      s20 = _mm256_fmadd_pd(av, b0, s20);
      s21 = _mm256_fmadd_pd(av, b1, s21);
      av = _mm256_set1_pd(ak[3]);
      s30 = _mm256_fmadd_pd(av, b0, s30);
      s31 = _mm256_fmadd_pd(av, b1, s31);
    }
    _mm256_storeu_pd(c0 + j, s00);
    _mm256_storeu_pd(c0 + j + 4, s01);
    _mm256_storeu_pd(c1 + j, s10);
    _mm256_storeu_pd(c1 + j + 4, s11);
    _mm256_storeu_pd(c2 + j, s20);
    _mm256_storeu_pd(c2 + j + 4, s21);
    _mm256_storeu_pd(c3 + j, s30);
    _mm256_storeu_pd(c3 + j + 4, s31);
  }
  for (; j < N; ++j) {
    double r0 = 0.0, r1 = 0.0, r2 = 0.0, r3 = 0.0;
    for (int k = 0; k < K; ++k) {
      const double* ak = A + static_cast<std::size_t>(k) * M + i0;
      const double bkj = B[static_cast<std::size_t>(k) * N + j];
      r0 += ak[0] * bkj;
      r1 += ak[1] * bkj;
      r2 += ak[2] * bkj;
      r3 += ak[3] * bkj;
    }
    c0[j] = r0;
    c1[j] = r1;
    c2[j] = r2;
    c3[j] = r3;
  }
}

void gemm_tn(const double* A, const double* B, double* C, int M, int N,
             int K) {
  int i = 0;
  for (; i + 4 <= M; i += 4) tn_rows4(A, B, C, i, M, N, K);
  for (; i < M; ++i) {
    double* c = C + static_cast<std::size_t>(i) * N;
    int j = 0;
    for (; j + 4 <= N; j += 4) {
      __m256d s = _mm256_setzero_pd();
      for (int k = 0; k < K; ++k)
        s = _mm256_fmadd_pd(
            _mm256_set1_pd(A[static_cast<std::size_t>(k) * M + i]),
            _mm256_loadu_pd(B + static_cast<std::size_t>(k) * N + j), s);
      _mm256_storeu_pd(c + j, s);
    }
    for (; j < N; ++j) {
      double r = 0.0;
      for (int k = 0; k < K; ++k)
        r += A[static_cast<std::size_t>(k) * M + i] *
             B[static_cast<std::size_t>(k) * N + j];
      c[j] = r;
    }
  }
}

// --- elementwise ------------------------------------------------------------

void add_bias(double* X, const double* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* x = X + static_cast<std::size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(
          x + c, _mm256_add_pd(_mm256_loadu_pd(x + c), _mm256_loadu_pd(bias + c)));
    for (; c < cols; ++c) x[c] += bias[c];
  }
}

void relu(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(const double* pre, double* g, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), mask));
  }
  for (; i < n; ++i)
    if (!(pre[i] > 0.0)) g[i] = 0.0;
}

void col_sums(const double* X, double* out, int rows, int cols) {
  std::fill(out, out + cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* x = X + static_cast<std::size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(
          out + c, _mm256_add_pd(_mm256_loadu_pd(out + c), _mm256_loadu_pd(x + c)));
    for (; c < cols; ++c) out[c] += x[c];
  }
}

double mse_grad(const double* pred, const double* tgt, double* grad,
                std::size_t n, double inv_count) {
  const __m256d scale = _mm256_set1_pd(2.0 * inv_count);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(pred + i), _mm256_loadu_pd(tgt + i));
    acc = _mm256_fmadd_pd(d, d, acc);
    _mm256_storeu_pd(grad + i, _mm256_mul_pd(scale, d));
  }
  double sse = hsum(acc);
  const double s = 2.0 * inv_count;
  for (; i < n; ++i) {
    const double d = pred[i] - tgt[i];
    sse += d * d;
    grad[i] = s * d;
  }
  return sse;
}

void adam_update(double* w, const double* g, double* m, double* v,
                 std::size_t n, double lr, double b1, double b2, double eps,
                 double inv_bc1, double inv_bc2) {
  const __m256d vb1 = _mm256_set1_pd(b1);
  const __m256d vnb1 = _mm256_set1_pd(1.0 - b1);
  const __m256d vb2 = _mm256_set1_pd(b2);
  const __m256d vnb2 = _mm256_set1_pd(1.0 - b2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vibc1 = _mm256_set1_pd(inv_bc1);
  const __m256d vibc2 = _mm256_set1_pd(inv_bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    mv = _mm256_fmadd_pd(vb1, mv, _mm256_mul_pd(vnb1, gv));
    vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(vnb2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d denom =
        _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vibc2)), veps);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(vlr, _mm256_mul_pd(mv, vibc1)), denom);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
    return nullptr;
  static const Ops ops{
      "avx2",  gemm_nn, gemm_nt,   gemm_tn,  add_bias,
      relu,    relu_mask, col_sums, mse_grad, adam_update,
  };
  return &ops;
}

}  // namespace ftlab::kern

#else

namespace ftlab::kern {
const Ops* avx2_ops() { return nullptr; }
}  // namespace ftlab::kern

#endif
