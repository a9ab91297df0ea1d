#include "gpnd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gpnd::geometry {

Matrix numerical_jacobian(const nn::DenseNetwork& decoder, std::span<const double> z, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("numerical_jacobian: step must be positive");
  const std::size_t n = z.size();
  if (n != decoder.in_dim()) throw std::invalid_argument("numerical_jacobian: latent dimension mismatch");
  Matrix pts(2 * n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) pts(2 * j, k) = pts(2 * j + 1, k) = z[k];
    pts(2 * j, j) = z[j] + h;
    pts(2 * j + 1, j) = z[j] - h;
  }
  const Matrix out = nn::forward(decoder, pts);
  Matrix jac(out.cols, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < out.cols; ++i) {
      const double d = (out(2 * j, i) - out(2 * j + 1, i)) / (2.0 * h);
      if (!std::isfinite(d)) throw NumericError("numerical_jacobian: non-finite decoder output");
      jac(i, j) = d;
    }
  return jac;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Replaces cols[k] by a unit vector orthogonal to every column in `keep`.
void complete_column(std::vector<std::vector<double>>& cols, std::size_t k, const std::vector<std::size_t>& keep) {
  const std::size_t m = cols[k].size();
  for (std::size_t e = 0; e < m; ++e) {
    std::vector<double> c(m, 0.0);
    c[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t q : keep) {
        const double proj = dot(c, cols[q]);
        for (std::size_t i = 0; i < m; ++i) c[i] -= proj * cols[q][i];
      }
    const double nrm = std::sqrt(dot(c, c));
    if (nrm > 1e-6) {
      for (auto& v : c) v /= nrm;
      cols[k] = std::move(c);
      return;
    }
  }
}

}  // namespace

ThinSvd thin_svd(const Matrix& j) {
  const std::size_t m = j.rows, n = j.cols;
  if (n == 0 || m < n) throw std::invalid_argument("thin_svd: need rows >= cols >= 1");
  for (double v : j.data)
    if (!std::isfinite(v)) throw NumericError("thin_svd: non-finite Jacobian");

  // Column-major working copies of J and V.
  std::vector<std::vector<double>> a(n, std::vector<double>(m));
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < m; ++r) a[c][r] = j(r, c);
    v[c][c] = 1.0;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 80;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(a[p], a[p]);
        const double beta = dot(a[q], a[q]);
        const double gamma = dot(a[p], a[q]);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double ap = a[p][i], aq = a[q][i];
          a[p][i] = c * ap - s * aq;
          a[q][i] = s * ap + c * aq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i], vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    if (!rotated) break;
  }

  std::vector<double> sv(n);
  for (std::size_t c = 0; c < n; ++c) sv[c] = std::sqrt(dot(a[c], a[c]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });

  ThinSvd out;
  out.u = Matrix(m, n);
  out.v = Matrix(n, n);
  out.s.resize(n);
  const double smax = sv[order[0]];
  const double floor = std::max(kRankTolerance * smax, std::numeric_limits<double>::min());

  std::vector<std::vector<double>> ucols(n);
  std::vector<std::size_t> good;
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = order[k];
    ucols[k] = a[c];
    if (sv[c] < floor || sv[c] < kRankTolerance * smax) {
      bad.push_back(k);
    } else {
      for (auto& x : ucols[k]) x /= sv[c];
      good.push_back(k);
    }
    out.s[k] = std::max(sv[c], floor);
  }
  out.degenerate = !bad.empty();
  for (std::size_t k : bad) {
    complete_column(ucols, k, good);
    good.push_back(k);
  }

  for (std::size_t k = 0; k < n; ++k) {
    const auto& vc = v[order[k]];
    double sign = 1.0;
    for (double x : vc)
      if (x != 0.0) {
        sign = x > 0.0 ? 1.0 : -1.0;
        break;
      }
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = sign * vc[i];
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = sign * ucols[k][i];
  }
  return out;
}

TangentDecomposition linearize(const nn::DenseNetwork& decoder, std::span<const double> z_bar, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("linearize: step must be positive");
  const std::size_t n = z_bar.size();
  if (n != decoder.in_dim()) throw std::invalid_argument("linearize: latent dimension mismatch");
  Matrix pts(2 * n + 1, n);
  for (std::size_t r = 0; r < pts.rows; ++r)
    for (std::size_t k = 0; k < n; ++k) pts(r, k) = z_bar[k];
  for (std::size_t j = 0; j < n; ++j) {
    pts(2 * j + 1, j) = z_bar[j] + h;
    pts(2 * j + 2, j) = z_bar[j] - h;
  }
  const Matrix out = nn::forward(decoder, pts);
  const std::size_t m = out.cols;
  Matrix jac(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      const double d = (out(2 * j + 1, i) - out(2 * j + 2, i)) / (2.0 * h);
      if (!std::isfinite(d)) throw NumericError("linearize: non-finite decoder output");
      jac(i, j) = d;
    }

  ThinSvd svd = thin_svd(jac);
  TangentDecomposition t;
  t.u_par = std::move(svd.u);
  t.s = std::move(svd.s);
  t.v = std::move(svd.v);
  t.z_bar.assign(z_bar.begin(), z_bar.end());
  t.x_par.assign(out.row(0).begin(), out.row(0).end());
  t.degenerate = svd.degenerate;
  return t;
}

LocalCoordinates local_coordinates(std::span<const double> x, const TangentDecomposition& t) {
  const std::size_t m = t.u_par.rows, n = t.u_par.cols;
  if (x.size() != m || t.x_par.size() != m) throw std::invalid_argument("local_coordinates: dimension mismatch");
  LocalCoordinates lc;
  lc.w_par.assign(n, 0.0);
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = x[i] - t.x_par[i];
  std::vector<double> proj(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ui = t.u_par.data.data() + i * n;
    for (std::size_t k = 0; k < n; ++k) {
      lc.w_par[k] += ui[k] * t.x_par[i];
      proj[k] += ui[k] * d[i];
    }
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* ui = t.u_par.data.data() + i * n;
    double along = 0.0;
    for (std::size_t k = 0; k < n; ++k) along += ui[k] * proj[k];
    const double res = d[i] - along;
    r2 += res * res;
  }
  lc.w_perp_norm = std::sqrt(r2);
  return lc;
}

}  // namespace gpnd::geometry
