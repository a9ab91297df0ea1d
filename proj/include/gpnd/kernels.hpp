#pragma once

#include "gpnd/matrix.hpp"

// Matrix products used by the dense layers. Each product has an OpenMP
// kernel (namespace kernels) and a plain triple-loop version (namespace
// kernels::reference) that the tests and the benchmark compare against.
//
// The OpenMP kernels compute every output element in one thread with a fixed
// summation order, so results do not depend on the thread count.

namespace gpnd::kernels {

/// c = a * b^T.  a: r x k, b: c x k, c: r x c.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);

/// c = a * b.  a: r x k, b: k x c.
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);

/// c = a^T * b.  a: k x r, b: k x c.
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

/// Worker count the kernels will use (omp_get_max_threads).
int max_threads();

/// Caps the worker count used by the kernels and by batch scoring.
void set_threads(int n);

namespace reference {
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);
}  // namespace reference

}  // namespace gpnd::kernels
