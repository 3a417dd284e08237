#pragma once

// Dense matrix kernels. Every kernel exists in a serial reference form and an
// OpenMP form; both accumulate inner products in 64-bit and split work so that
// the per-element accumulation order is identical, making the two variants
// bit-identical for the same inputs.

#include <cstddef>

namespace tmkd::kern {

enum class Par { serial, omp };

// Process-wide default used by the autodiff layer.
Par default_par();
void set_default_par(Par p);

// C[m x n] = A * B (+= when accumulate). Row-major, tight strides.
// gemm_nn: A is m x k, B is k x n
// gemm_nt: A is m x k, B is n x k   (C = A * B^T)
// gemm_tn: A is k x m, B is k x n   (C = A^T * B)
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c,
             bool accumulate, Par par);
template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c,
             bool accumulate, Par par);
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c,
             bool accumulate, Par par);

}  // namespace tmkd::kern
