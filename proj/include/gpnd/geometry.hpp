#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "gpnd/errors.hpp"
#include "gpnd/matrix.hpp"
#include "gpnd/nn.hpp"

// Local linearization of the decoder around a latent point: Jacobian by
// central differences, thin SVD, and tangent/orthogonal coordinates.

namespace gpnd::geometry {

inline constexpr double kDefaultJacobianStep = 1e-4;

/// Singular values below kRankTolerance * s_max mark a degenerate Jacobian;
/// they are floored at that value.
inline constexpr double kRankTolerance = 1e-10;

/// Central-difference Jacobian of an arbitrary map. `f` takes a
/// std::span<const double> of length n and returns a std::vector<double> of
/// length m. Column j is (f(z + h e_j) - f(z - h e_j)) / (2h).
template <class F>
  requires std::invocable<F&, std::span<const double>>
Matrix numerical_jacobian(F&& f, std::span<const double> z, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("numerical_jacobian: step must be positive");
  std::vector<double> zp(z.begin(), z.end());
  Matrix jac;
  for (std::size_t j = 0; j < z.size(); ++j) {
    zp[j] = z[j] + h;
    const std::vector<double> hi = f(std::span<const double>(zp));
    zp[j] = z[j] - h;
    const std::vector<double> lo = f(std::span<const double>(zp));
    zp[j] = z[j];
    if (j == 0) jac = Matrix(hi.size(), z.size());
    if (hi.size() != jac.rows || lo.size() != jac.rows)
      throw std::invalid_argument("numerical_jacobian: output length changed");
    for (std::size_t i = 0; i < jac.rows; ++i) {
      const double d = (hi[i] - lo[i]) / (2.0 * h);
      if (!std::isfinite(d)) throw NumericError("numerical_jacobian: non-finite decoder output");
      jac(i, j) = d;
    }
  }
  return jac;
}

/// Jacobian of a dense network, with all 2n perturbed points in one batch.
Matrix numerical_jacobian(const nn::DenseNetwork& decoder, std::span<const double> z, double h);

/// J = U diag(s) V^T with U m x n (orthonormal columns), s descending,
/// V n x n orthogonal. Requires m >= n.
struct ThinSvd {
  Matrix u;
  std::vector<double> s;
  Matrix v;
  bool degenerate = false;
};

/// One-sided (Hestenes) Jacobi SVD. Each column of V has its first nonzero
/// entry positive. Degenerate inputs get singular values floored at
/// kRankTolerance * s_max and U completed to an orthonormal set.
ThinSvd thin_svd(const Matrix& j);

struct TangentDecomposition {
  Matrix u_par;               // m x n, spans the tangent space
  std::vector<double> s;      // n, descending
  Matrix v;                   // n x n
  std::vector<double> z_bar;  // linearization point
  std::vector<double> x_par;  // f(z_bar)
  bool degenerate = false;
};

/// Evaluates f(z_bar) and J_f(z_bar) in a single batch of 2n + 1 decoder
/// passes and decomposes the Jacobian.
TangentDecomposition linearize(const nn::DenseNetwork& decoder, std::span<const double> z_bar, double h);

struct LocalCoordinates {
  std::vector<double> w_par;  // U_par^T x_par
  double w_perp_norm = 0.0;   // |(I - U_par U_par^T)(x - x_par)|
};

/// Tangent coordinates of x. The orthogonal complement is never formed:
/// the residual (x - x_par) minus its projection onto U_par gives |w_perp|.
LocalCoordinates local_coordinates(std::span<const double> x, const TangentDecomposition& t);

}  // namespace gpnd::geometry
