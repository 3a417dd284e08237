#include "tmkd/kernels.hpp"

#include <vector>

namespace tmkd::kern {

namespace {
Par g_par = Par::omp;
}

Par default_par() { return g_par; }
void set_default_par(Par p) { g_par = p; }

// One output row of C = A*B: accumulate row i of A against all of B into a
// 64-bit row buffer, then write back.
template <typename T>
static inline void nn_row(int i, int n, int k, const T* a, const T* b, T* c,
                          bool accumulate, double* acc) {
  for (int j = 0; j < n; ++j) acc[j] = 0.0;
  const T* arow = a + static_cast<std::size_t>(i) * k;
  for (int l = 0; l < k; ++l) {
    const double ail = static_cast<double>(arow[l]);
    const T* brow = b + static_cast<std::size_t>(l) * n;
    for (int j = 0; j < n; ++j) acc[j] += ail * static_cast<double>(brow[j]);
  }
  T* crow = c + static_cast<std::size_t>(i) * n;
  if (accumulate) {
    for (int j = 0; j < n; ++j) crow[j] = static_cast<T>(static_cast<double>(crow[j]) + acc[j]);
  } else {
    for (int j = 0; j < n; ++j) crow[j] = static_cast<T>(acc[j]);
  }
}

template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c,
             bool accumulate, Par par) {
  if (par == Par::serial) {
    std::vector<double> acc(n);
    for (int i = 0; i < m; ++i) nn_row(i, n, k, a, b, c, accumulate, acc.data());
  } else {
#pragma omp parallel
    {
      std::vector<double> acc(n);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) nn_row(i, n, k, a, b, c, accumulate, acc.data());
    }
  }
}

// C[i][j] = dot(A row i, B row j)
template <typename T>
static inline void nt_row(int i, int n, int k, const T* a, const T* b, T* c,
                          bool accumulate) {
  const T* arow = a + static_cast<std::size_t>(i) * k;
  T* crow = c + static_cast<std::size_t>(i) * n;
  for (int j = 0; j < n; ++j) {
    const T* brow = b + static_cast<std::size_t>(j) * k;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int l = 0;
    for (; l + 4 <= k; l += 4) {
      s0 += static_cast<double>(arow[l]) * static_cast<double>(brow[l]);
      s1 += static_cast<double>(arow[l + 1]) * static_cast<double>(brow[l + 1]);
      s2 += static_cast<double>(arow[l + 2]) * static_cast<double>(brow[l + 2]);
      s3 += static_cast<double>(arow[l + 3]) * static_cast<double>(brow[l + 3]);
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; l < k; ++l) s += static_cast<double>(arow[l]) * static_cast<double>(brow[l]);
    if (accumulate) s += static_cast<double>(crow[j]);
    crow[j] = static_cast<T>(s);
  }
}

template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c,
             bool accumulate, Par par) {
  if (par == Par::serial) {
    for (int i = 0; i < m; ++i) nt_row(i, n, k, a, b, c, accumulate);
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) nt_row(i, n, k, a, b, c, accumulate);
  }
}

// C[i][j] = sum_l A[l][i] * B[l][j]
template <typename T>
static inline void tn_row(int i, int n, int m, int k, const T* a, const T* b,
                          T* c, bool accumulate, double* acc) {
  for (int j = 0; j < n; ++j) acc[j] = 0.0;
  for (int l = 0; l < k; ++l) {
    const double ali = static_cast<double>(a[static_cast<std::size_t>(l) * m + i]);
    const T* brow = b + static_cast<std::size_t>(l) * n;
    for (int j = 0; j < n; ++j) acc[j] += ali * static_cast<double>(brow[j]);
  }
  T* crow = c + static_cast<std::size_t>(i) * n;
  if (accumulate) {
    for (int j = 0; j < n; ++j) crow[j] = static_cast<T>(static_cast<double>(crow[j]) + acc[j]);
  } else {
    for (int j = 0; j < n; ++j) crow[j] = static_cast<T>(acc[j]);
  }
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c,
             bool accumulate, Par par) {
  if (par == Par::serial) {
    std::vector<double> acc(n);
    for (int i = 0; i < m; ++i) tn_row(i, n, m, k, a, b, c, accumulate, acc.data());
  } else {
#pragma omp parallel
    {
      std::vector<double> acc(n);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) tn_row(i, n, m, k, a, b, c, accumulate, acc.data());
    }
  }
}

template void gemm_nn<float>(int, int, int, const float*, const float*, float*, bool, Par);
template void gemm_nt<float>(int, int, int, const float*, const float*, float*, bool, Par);
template void gemm_tn<float>(int, int, int, const float*, const float*, float*, bool, Par);
template void gemm_nn<double>(int, int, int, const double*, const double*, double*, bool, Par);
template void gemm_nt<double>(int, int, int, const double*, const double*, double*, bool, Par);
template void gemm_tn<double>(int, int, int, const double*, const double*, double*, bool, Par);

}  // namespace tmkd::kern
