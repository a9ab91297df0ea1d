#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gpnd {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool empty() const { return data.empty(); }
  bool operator==(const Matrix&) const = default;

  static Matrix from_row(std::span<const double> v) {
    Matrix m(1, v.size());
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
  }
};

/// Returns rows [first, first + count) as a new matrix.
inline Matrix slice_rows(const Matrix& m, std::size_t first, std::size_t count) {
  if (first + count > m.rows) throw std::out_of_range("slice_rows: range exceeds matrix");
  Matrix out(count, m.cols);
  std::copy(m.data.begin() + static_cast<std::ptrdiff_t>(first * m.cols),
            m.data.begin() + static_cast<std::ptrdiff_t>((first + count) * m.cols), out.data.begin());
  return out;
}

/// Gathers the given rows into a new matrix.
inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = m.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

/// Stacks b under a. Column counts must match.
inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("vstack: column mismatch");
  Matrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

}  // namespace gpnd
