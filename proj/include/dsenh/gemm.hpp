#ifndef DSENH_GEMM_HPP
#define DSENH_GEMM_HPP

#include <algorithm>
#include <cstring>
#include <vector>

namespace dsenh::detail {

// C[M x N] += A[M x K] . B[K x N], all row-major. Register-tiled
// broadcast-FMA kernel: 4-row x 32-column accumulator blocks held in
// registers across the k loop.
template <typename T>
void gemm_acc(int M, int N, int K, const T* A, int lda, const T* B, int ldb,
              T* C, int ldc) {
  constexpr int MR = 4;
  constexpr int NB = 32;
  int m = 0;
  for (; m + MR <= M; m += MR) {
    const T* a0 = A + static_cast<size_t>(m + 0) * lda;
    const T* a1 = A + static_cast<size_t>(m + 1) * lda;
    const T* a2 = A + static_cast<size_t>(m + 2) * lda;
    const T* a3 = A + static_cast<size_t>(m + 3) * lda;
    T* c0 = C + static_cast<size_t>(m + 0) * ldc;
    T* c1 = C + static_cast<size_t>(m + 1) * ldc;
    T* c2 = C + static_cast<size_t>(m + 2) * ldc;
    T* c3 = C + static_cast<size_t>(m + 3) * ldc;
    int n = 0;
    for (; n + NB <= N; n += NB) {
      T acc0[NB], acc1[NB], acc2[NB], acc3[NB];
      for (int j = 0; j < NB; ++j) {
        acc0[j] = c0[n + j];
        acc1[j] = c1[n + j];
        acc2[j] = c2[n + j];
        acc3[j] = c3[n + j];
      }
      for (int k = 0; k < K; ++k) {
        const T* __restrict__ b = B + static_cast<size_t>(k) * ldb + n;
        const T w0 = a0[k], w1 = a1[k], w2 = a2[k], w3 = a3[k];
#pragma omp simd
        for (int j = 0; j < NB; ++j) {
          acc0[j] += w0 * b[j];
          acc1[j] += w1 * b[j];
          acc2[j] += w2 * b[j];
          acc3[j] += w3 * b[j];
        }
      }
      for (int j = 0; j < NB; ++j) {
        c0[n + j] = acc0[j];
        c1[n + j] = acc1[j];
        c2[n + j] = acc2[j];
        c3[n + j] = acc3[j];
      }
    }
    for (; n < N; ++n) {
      T s0 = c0[n], s1 = c1[n], s2 = c2[n], s3 = c3[n];
      for (int k = 0; k < K; ++k) {
        const T b = B[static_cast<size_t>(k) * ldb + n];
        s0 += a0[k] * b;
        s1 += a1[k] * b;
        s2 += a2[k] * b;
        s3 += a3[k] * b;
      }
      c0[n] = s0;
      c1[n] = s1;
      c2[n] = s2;
      c3[n] = s3;
    }
  }
  for (; m < M; ++m) {
    const T* a = A + static_cast<size_t>(m) * lda;
    T* c = C + static_cast<size_t>(m) * ldc;
    for (int k = 0; k < K; ++k) {
      const T* __restrict__ b = B + static_cast<size_t>(k) * ldb;
      const T w = a[k];
      if (w == T(0)) continue;
#pragma omp simd
      for (int n = 0; n < N; ++n) c[n] += w * b[n];
    }
  }
}

// C[M x N] += A[M x K] . B^T where B is (N x K) row-major; i.e. dots of
// contiguous rows. 2x2 blocking reuses each loaded row twice.
template <typename T>
void gemm_abt_acc(int M, int N, int K, const T* A, int lda, const T* B,
                  int ldb, T* C, int ldc) {
  int m = 0;
  for (; m + 2 <= M; m += 2) {
    const T* a0 = A + static_cast<size_t>(m) * lda;
    const T* a1 = a0 + lda;
    T* c0 = C + static_cast<size_t>(m) * ldc;
    T* c1 = c0 + ldc;
    int n = 0;
    for (; n + 2 <= N; n += 2) {
      const T* b0 = B + static_cast<size_t>(n) * ldb;
      const T* b1 = b0 + ldb;
      T s00 = 0, s01 = 0, s10 = 0, s11 = 0;
#pragma omp simd reduction(+ : s00, s01, s10, s11)
      for (int k = 0; k < K; ++k) {
        s00 += a0[k] * b0[k];
        s01 += a0[k] * b1[k];
        s10 += a1[k] * b0[k];
        s11 += a1[k] * b1[k];
      }
      c0[n] += s00;
      c0[n + 1] += s01;
      c1[n] += s10;
      c1[n + 1] += s11;
    }
    for (; n < N; ++n) {
      const T* b0 = B + static_cast<size_t>(n) * ldb;
      T s0 = 0, s1 = 0;
#pragma omp simd reduction(+ : s0, s1)
      for (int k = 0; k < K; ++k) {
        s0 += a0[k] * b0[k];
        s1 += a1[k] * b0[k];
      }
      c0[n] += s0;
      c1[n] += s1;
    }
  }
  for (; m < M; ++m) {
    const T* a = A + static_cast<size_t>(m) * lda;
    T* c = C + static_cast<size_t>(m) * ldc;
    for (int n = 0; n < N; ++n) {
      const T* b = B + static_cast<size_t>(n) * ldb;
      T s = 0;
#pragma omp simd reduction(+ : s)
      for (int k = 0; k < K; ++k) s += a[k] * b[k];
      c[n] += s;
    }
  }
}

}  // namespace dsenh::detail

#endif
