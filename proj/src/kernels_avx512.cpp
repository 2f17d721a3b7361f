// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX-512F kernel variant. Same blocking scheme as the AVX2 kernels with
// 8-wide lanes; column tails are handled with write masks instead of scalar
// remainder loops.

#include "ftlab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ftlab::kern {
namespace {

inline __mmask8 tail_mask(int remaining) {
  return remaining >= 8 ? static_cast<__mmask8>(0xFF)
                        : static_cast<__mmask8>((1u << remaining) - 1u);
}

void gemm_nn(const double* A, const double* B, double* C, int M, int N,
             int K) {
  int i = 0;
  for (; i + 4 <= M; i += 4) {
    const double* a0 = A + static_cast<std::size_t>(i + 0) * K;
    const double* a1 = A + static_cast<std::size_t>(i + 1) * K;
    const double* a2 = A + static_cast<std::size_t>(i + 2) * K;
    const double* a3 = A + static_cast<std::size_t>(i + 3) * K;
    for (int j = 0; j < N; j += 8) {
      const __mmask8 mk = tail_mask(N - j);
      __m512d s0 = _mm512_setzero_pd();
      __m512d s1 = _mm512_setzero_pd();
      __m512d s2 = _mm512_setzero_pd();
      __m512d s3 = _mm512_setzero_pd();
      for (int k = 0; k < K; ++k) {
        const __m512d b =
            _mm512_maskz_loadu_pd(mk, B + static_cast<std::size_t>(k) * N + j);
        s0 = _mm512_fmadd_pd(_mm512_set1_pd(a0[k]), b, s0);
        s1 = _mm512_fmadd_pd(_mm512_set1_pd(a1[k]), b, s1);
        s2 = _mm512_fmadd_pd(_mm512_set1_pd(a2[k]), b, s2);
        s3 = _mm512_fmadd_pd(_mm512_set1_pd(a3[k]), b, s3);
      }
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 0) * N + j, mk, s0);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 1) * N + j, mk, s1);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 2) * N + j, mk, s2);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 3) * N + j, mk, s3);
    }
  }
  for (; i < M; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * K;
    for (int j = 0; j < N; j += 8) {
      const __mmask8 mk = tail_mask(N - j);
      __m512d s = _mm512_setzero_pd();
      for (int k = 0; k < K; ++k)
        s = _mm512_fmadd_pd(
            _mm512_set1_pd(a[k]),
            _mm512_maskz_loadu_pd(mk, B + static_cast<std::size_t>(k) * N + j),
            s);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i) * N + j, mk, s);
    }
  }
}

void gemm_nt(const double* A, const double* B, double* C, int M, int N,
             int K) {
  const int k8 = K - K % 8;
  for (int i = 0; i < M; ++i) {
    const double* a = A + static_cast<std::size_t>(i) * K;
    double* c = C + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) {
      const double* b = B + static_cast<std::size_t>(j) * K;
      __m512d s = _mm512_setzero_pd();
      for (int k = 0; k < k8; k += 8)
        s = _mm512_fmadd_pd(_mm512_loadu_pd(a + k), _mm512_loadu_pd(b + k), s);
      double r = _mm512_reduce_add_pd(s);
      for (int k = k8; k < K; ++k) r += a[k] * b[k];
      c[j] = r;
    }
  }
}

void gemm_tn(const double* A, const double* B, double* C, int M, int N,
             int K) {
  int i = 0;
  for (; i + 4 <= M; i += 4) {
    for (int j = 0; j < N; j += 8) {
      const __mmask8 mk = tail_mask(N - j);
      __m512d s0 = _mm512_setzero_pd();
      __m512d s1 = _mm512_setzero_pd();
      __m512d s2 = _mm512_setzero_pd();
      __m512d s3 = _mm512_setzero_pd();
      for (int k = 0; k < K; ++k) {
        const double* ak = A + static_cast<std::size_t>(k) * M + i;
        const __m512d b =
            _mm512_maskz_loadu_pd(mk, B + static_cast<std::size_t>(k) * N + j);
        s0 = _mm512_fmadd_pd(_mm512_set1_pd(ak[0]), b, s0);
        s1 = _mm512_fmadd_pd(_mm512_set1_pd(ak[1]), b, s1);
        s2 = _mm512_fmadd_pd(_mm512_set1_pd(ak[2]), b, s2);
        s3 = _mm512_fmadd_pd(_mm512_set1_pd(ak[3]), b, s3);
      }
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 0) * N + j, mk, s0);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 1) * N + j, mk, s1);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 2) * N + j, mk, s2);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i + 3) * N + j, mk, s3);
    }
  }
  for (; i < M; ++i) {
    for (int j = 0; j < N; j += 8) {
      const __mmask8 mk = tail_mask(N - j);
      __m512d s = _mm512_setzero_pd();
      for (int k = 0; k < K; ++k)
        s = _mm512_fmadd_pd(
            _mm512_set1_pd(A[static_cast<std::size_t>(k) * M + i]),
            _mm512_maskz_loadu_pd(mk, B + static_cast<std::size_t>(k) * N + j),
            s);
      _mm512_mask_storeu_pd(C + static_cast<std::size_t>(i) * N + j, mk, s);
    }
  }
}

void add_bias(double* X, const double* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* x = X + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; c += 8) {
      const __mmask8 mk = tail_mask(cols - c);
      const __m512d v = _mm512_add_pd(_mm512_maskz_loadu_pd(mk, x + c),
                                      _mm512_maskz_loadu_pd(mk, bias + c));
      _mm512_mask_storeu_pd(x + c, mk, v);
    }
  }
}

void relu(double* x, std::size_t n) {
  const __m512d zero = _mm512_setzero_pd();
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mk = tail_mask(static_cast<int>(std::min<std::size_t>(n - i, 8)));
    const __m512d v = _mm512_max_pd(_mm512_maskz_loadu_pd(mk, x + i), zero);
    _mm512_mask_storeu_pd(x + i, mk, v);
  }
}

void relu_mask(const double* pre, double* g, std::size_t n) {
  const __m512d zero = _mm512_setzero_pd();
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mk = tail_mask(static_cast<int>(std::min<std::size_t>(n - i, 8)));
    const __m512d p = _mm512_maskz_loadu_pd(mk, pre + i);
    const __mmask8 pos = _mm512_cmp_pd_mask(p, zero, _CMP_GT_OQ);
    const __m512d gv =
        _mm512_maskz_mov_pd(pos, _mm512_maskz_loadu_pd(mk, g + i));
    _mm512_mask_storeu_pd(g + i, mk, gv);
  }
}

void col_sums(const double* X, double* out, int rows, int cols) {
  std::fill(out, out + cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* x = X + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; c += 8) {
      const __mmask8 mk = tail_mask(cols - c);
      const __m512d v = _mm512_add_pd(_mm512_maskz_loadu_pd(mk, out + c),
                                      _mm512_maskz_loadu_pd(mk, x + c));
      _mm512_mask_storeu_pd(out + c, mk, v);
    }
  }
}

double mse_grad(const double* pred, const double* tgt, double* grad,
                std::size_t n, double inv_count) {
  const __m512d scale = _mm512_set1_pd(2.0 * inv_count);
  __m512d acc = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512d d =
        _mm512_sub_pd(_mm512_loadu_pd(pred + i), _mm512_loadu_pd(tgt + i));
    acc = _mm512_fmadd_pd(d, d, acc);
    _mm512_storeu_pd(grad + i, _mm512_mul_pd(scale, d));
  }
  double sse = _mm512_reduce_add_pd(acc);
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
  const __m512d vb1 = _mm512_set1_pd(b1);
  const __m512d vnb1 = _mm512_set1_pd(1.0 - b1);
  const __m512d vb2 = _mm512_set1_pd(b2);
  const __m512d vnb2 = _mm512_set1_pd(1.0 - b2);
  const __m512d vlr = _mm512_set1_pd(lr);
  const __m512d veps = _mm512_set1_pd(eps);
  const __m512d vibc1 = _mm512_set1_pd(inv_bc1);
  const __m512d vibc2 = _mm512_set1_pd(inv_bc2);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512d gv = _mm512_loadu_pd(g + i);
    __m512d mv = _mm512_loadu_pd(m + i);
    __m512d vv = _mm512_loadu_pd(v + i);
    mv = _mm512_fmadd_pd(vb1, mv, _mm512_mul_pd(vnb1, gv));
    vv = _mm512_fmadd_pd(vb2, vv, _mm512_mul_pd(vnb2, _mm512_mul_pd(gv, gv)));
    _mm512_storeu_pd(m + i, mv);
    _mm512_storeu_pd(v + i, vv);
    const __m512d denom =
        _mm512_add_pd(_mm512_sqrt_pd(_mm512_mul_pd(vv, vibc2)), veps);
    const __m512d step =
        _mm512_div_pd(_mm512_mul_pd(vlr, _mm512_mul_pd(mv, vibc1)), denom);
    _mm512_storeu_pd(w + i, _mm512_sub_pd(_mm512_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace

const Ops* avx512_ops() {
  if (!__builtin_cpu_supports("avx512f")) return nullptr;
  static const Ops ops{
      "avx512", gemm_nn, gemm_nt,   gemm_tn,  add_bias,
      relu,     relu_mask, col_sums, mse_grad, adam_update,
  };
  return &ops;
}

}  // namespace ftlab::kern

#else

namespace ftlab::kern {
const Ops* avx512_ops() { return nullptr; }
}  // namespace ftlab::kern

#endif
