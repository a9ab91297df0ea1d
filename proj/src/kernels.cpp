#include "gpnd/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>

namespace gpnd::kernels {

namespace {

// Below this many multiply-adds a product runs on the calling thread.
constexpr std::size_t kParallelWork = 1u << 16;

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

inline double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline void axpy(double alpha, const double* __restrict x, double* __restrict y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  check(a.cols == b.cols, "matmul_nt: inner dimension mismatch");
  const std::size_t r = a.rows, n = b.rows, k = a.cols;
  if (c.rows != r || c.cols != n) c = Matrix(r, n);
  const bool par = r * n * k >= kParallelWork;
  const auto rows = static_cast<std::ptrdiff_t>(r);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double* ai = a.data.data() + static_cast<std::size_t>(i) * k;
    double* ci = c.data.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = dot(ai, b.data.data() + j * k, k);
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  check(a.cols == b.rows, "matmul_nn: inner dimension mismatch");
  const std::size_t r = a.rows, k = a.cols, n = b.cols;
  if (c.rows != r || c.cols != n) c = Matrix(r, n);
  const bool par = r * n * k >= kParallelWork;
  const auto rows = static_cast<std::ptrdiff_t>(r);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* ci = c.data.data() + static_cast<std::size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a.data.data() + static_cast<std::size_t>(i) * k;
    for (std::size_t p = 0; p < k; ++p) {
      if (ai[p] != 0.0) axpy(ai[p], b.data.data() + p * n, ci, n);
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  check(a.rows == b.rows, "matmul_tn: inner dimension mismatch");
  const std::size_t k = a.rows, r = a.cols, n = b.cols;
  if (c.rows != r || c.cols != n) c = Matrix(r, n);
  const bool par = r * n * k >= kParallelWork;
  const auto rows = static_cast<std::ptrdiff_t>(r);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* ci = c.data.data() + static_cast<std::size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double s = a.data[p * r + static_cast<std::size_t>(i)];
      if (s != 0.0) axpy(s, b.data.data() + p * n, ci, n);
    }
  }
}

namespace reference {

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  check(a.cols == b.cols, "matmul_nt: inner dimension mismatch");
  c = Matrix(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) s += a(i, p) * b(j, p);
      c(i, j) = s;
    }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  check(a.cols == b.rows, "matmul_nn: inner dimension mismatch");
  c = Matrix(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) s += a(i, p) * b(p, j);
      c(i, j) = s;
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  check(a.rows == b.rows, "matmul_tn: inner dimension mismatch");
  c = Matrix(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows; ++p) s += a(p, i) * b(p, j);
      c(i, j) = s;
    }
}

}  // namespace reference
}  // namespace gpnd::kernels
