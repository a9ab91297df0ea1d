#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gpnd/geometry.hpp"
#include "gpnd/rng.hpp"

using namespace gpnd;
using namespace gpnd::geometry;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.normal();
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

// Single identity layer with the given weight (m x n) and bias.
nn::DenseNetwork linear_net(const Matrix& a, std::vector<double> b) {
  return nn::DenseNetwork{{nn::DenseLayer{a, std::move(b), nn::Activation::identity}}};
}

TangentDecomposition from_svd(const Matrix& j, std::vector<double> x_par) {
  auto svd = thin_svd(j);
  TangentDecomposition t;
  t.u_par = svd.u;
  t.s = svd.s;
  t.v = svd.v;
  t.x_par = std::move(x_par);
  return t;
}

}  // namespace

TEST_CASE("central differences are exact on affine and quadratic maps") {
  Rng rng(Seed{1});
  const auto a = random_matrix(5, 3, rng);
  const std::vector<double> z{0.2, -0.7, 1.3};
  const auto j = numerical_jacobian(linear_net(a, {1, 2, 3, 4, 5}), z, 1e-4);
  for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(std::abs(j.data[i] - a.data[i]) < 1e-10);

  auto quad = [](std::span<const double> v) { return std::vector<double>{v[0] * v[0], v[0]}; };
  for (double h : {1e-3, 0.25, 1.0}) {
    const auto jq = numerical_jacobian(quad, std::vector<double>{1.0}, h);
    CHECK(jq(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(jq(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("central differences match the analytic derivative of sin and cos") {
  auto f = [](std::span<const double> v) { return std::vector<double>{std::sin(v[0]), std::cos(v[0])}; };
  const auto j = numerical_jacobian(f, std::vector<double>{0.7}, 1e-5);
  CHECK(std::abs(j(0, 0) - std::cos(0.7)) < 1e-8);
  CHECK(std::abs(j(1, 0) + std::sin(0.7)) < 1e-8);
}

TEST_CASE("non-finite decoder output is an error") {
  auto f = [](std::span<const double> v) { return std::vector<double>{1.0 / (v[0] - 1e-3)}; };
  CHECK_THROWS_AS(numerical_jacobian(f, std::vector<double>{0.0}, 1e-3), NumericError);
  CHECK_THROWS_AS(numerical_jacobian(f, std::vector<double>{0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("thin_svd of a diagonal matrix") {
  Matrix j(3, 2);
  j(0, 0) = 3;
  j(1, 1) = 2;
  const auto svd = thin_svd(j);
  CHECK(svd.s[0] == doctest::Approx(3));
  CHECK(svd.s[1] == doctest::Approx(2));
  CHECK(std::abs(svd.u(0, 0)) == doctest::Approx(1));
  CHECK(std::abs(svd.u(1, 1)) == doctest::Approx(1));
  CHECK(svd.u(2, 0) == 0.0);
  CHECK(svd.u(2, 1) == 0.0);
  CHECK(svd.v(0, 0) == doctest::Approx(1));
  CHECK(svd.v(1, 1) == doctest::Approx(1));
  CHECK_FALSE(svd.degenerate);
}

TEST_CASE("thin_svd of an isometry has unit singular values") {
  Rng rng(Seed{2});
  const auto q = Eigen::HouseholderQR<Eigen::MatrixXd>(to_eigen(random_matrix(7, 4, rng))).householderQ() *
                 Eigen::MatrixXd::Identity(7, 4);
  Matrix j(7, 4);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 4; ++c) j(r, c) = q(r, c);
  for (double s : thin_svd(j).s) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singular values squared match the eigenvalues of J^T J") {
  Rng rng(Seed{3});
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = random_matrix(6, 3, rng);
    const auto svd = thin_svd(j);
    const Eigen::MatrixXd e = to_eigen(j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * e);
    const auto ev = es.eigenvalues();  // ascending
    for (int k = 0; k < 3; ++k) CHECK(std::abs(svd.s[k] * svd.s[k] - ev(2 - k)) < 1e-8);
  }
}

TEST_CASE("thin_svd invariants on 1000 random matrices") {
  Rng rng(Seed{4});
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng.below(127);
    const std::size_t n = 1 + rng.below(std::min<std::size_t>(32, m));
    const auto j = random_matrix(m, n, rng);
    const auto svd = thin_svd(j);
    const Eigen::MatrixXd u = to_eigen(svd.u), v = to_eigen(svd.v), je = to_eigen(j);
    Eigen::VectorXd s(n);
    for (std::size_t k = 0; k < n; ++k) s(k) = svd.s[k];
    const double ortho = (u.transpose() * u - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    const double vortho = (v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    const double recon = (u * s.asDiagonal() * v.transpose() - je).norm() / je.norm();
    bool sorted = true;
    for (std::size_t k = 0; k + 1 < n; ++k) sorted &= svd.s[k] >= svd.s[k + 1];
    bool sign = true;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (v(i, k) != 0.0) {
          sign &= v(i, k) > 0.0;
          break;
        }
    if (!(ortho < 1e-8 && vortho < 1e-8 && recon < 1e-6 && sorted && sign && svd.s[n - 1] >= 0.0)) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("rank-deficient Jacobians are flagged and completed") {
  Matrix j(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    j(i, 0) = 1.0 + static_cast<double>(i);
    j(i, 1) = 2.0 * j(i, 0);
    j(i, 2) = static_cast<double>(i * i);
  }
  const auto svd = thin_svd(j);
  CHECK(svd.degenerate);
  CHECK(svd.s[2] == doctest::Approx(kRankTolerance * svd.s[0]));
  const Eigen::MatrixXd u = to_eigen(svd.u);
  CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("local coordinates, axis-aligned example") {
  Matrix u(2, 1);
  u(0, 0) = 1.0;
  TangentDecomposition t;
  t.u_par = u;
  t.s = {1.0};
  t.x_par = {3.0, 0.0};
  const auto lc = local_coordinates(std::vector<double>{3.0, 4.0}, t);
  CHECK(lc.w_par == std::vector<double>{3.0});
  CHECK(lc.w_perp_norm == doctest::Approx(4.0));
  CHECK_THROWS_AS(local_coordinates(std::vector<double>{1.0}, t), std::invalid_argument);
}

TEST_CASE("points on the tangent plane have no perpendicular part") {
  Rng rng(Seed{5});
  const auto j = random_matrix(9, 3, rng);
  std::vector<double> x_par(9);
  for (auto& v : x_par) v = rng.normal();
  const auto t = from_svd(j, x_par);
  std::vector<double> x = x_par;
  for (std::size_t i = 0; i < 9; ++i) x[i] += 0.7 * j(i, 0) - 1.3 * j(i, 2);
  CHECK(local_coordinates(x, t).w_perp_norm < 1e-8);
}

TEST_CASE("perpendicular norm matches an explicit orthonormal completion") {
  Rng rng(Seed{6});
  for (int trial = 0; trial < 50; ++trial) {
    const auto j = random_matrix(5, 2, rng);
    std::vector<double> x_par(5), x(5);
    for (auto& v : x_par) v = rng.normal();
    for (auto& v : x) v = rng.normal();
    const auto t = from_svd(j, x_par);

    // Gram-Schmidt: U_par followed by the standard basis, keep 3 more columns.
    std::vector<Eigen::VectorXd> basis;
    for (int k = 0; k < 2; ++k) basis.push_back(to_eigen(t.u_par).col(k));
    for (int e = 0; e < 5 && basis.size() < 5; ++e) {
      Eigen::VectorXd c = Eigen::VectorXd::Unit(5, e);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) c -= c.dot(b) * b;
      if (c.norm() > 1e-6) basis.push_back(c.normalized());
    }
    REQUIRE(basis.size() == 5);
    Eigen::VectorXd d(5);
    for (int i = 0; i < 5; ++i) d(i) = x[i] - x_par[i];
    double perp2 = 0.0;
    for (int k = 2; k < 5; ++k) perp2 += basis[k].dot(d) * basis[k].dot(d);

    const auto lc = local_coordinates(x, t);
    CHECK(std::abs(lc.w_perp_norm - std::sqrt(perp2)) < 1e-10);
    // Pythagoras on the residual.
    double par2 = 0.0;
    for (int k = 0; k < 2; ++k) par2 += basis[k].dot(d) * basis[k].dot(d);
    CHECK(std::abs(par2 + lc.w_perp_norm * lc.w_perp_norm - d.squaredNorm()) < 1e-6 * d.squaredNorm());
    for (int k = 0; k < 2; ++k) {
      double w = 0.0;
      for (int i = 0; i < 5; ++i) w += t.u_par(i, k) * x_par[i];
      CHECK(lc.w_par[k] == doctest::Approx(w).epsilon(1e-12));
    }
  }
}

TEST_CASE("linearize is exact for a linear decoder") {
  Rng rng(Seed{7});
  const auto a = random_matrix(12, 3, rng);
  std::vector<double> b(12);
  for (auto& v : b) v = rng.normal();
  const auto dec = linear_net(a, b);
  const std::vector<double> z{0.4, -1.1, 0.3};
  const auto t = linearize(dec, z, kDefaultJacobianStep);
  CHECK(t.z_bar == z);
  for (std::size_t i = 0; i < 12; ++i) {
    double xi = b[i];
    for (std::size_t k = 0; k < 3; ++k) xi += a(i, k) * z[k];
    CHECK(t.x_par[i] == doctest::Approx(xi).epsilon(1e-14));
  }
  // Closed-form projections with Eigen's QR basis of A.
  const Eigen::MatrixXd ae = to_eigen(a);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ae);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(12, 3);
  Eigen::VectorXd x(12), xp(12);
  for (int i = 0; i < 12; ++i) {
    x(i) = rng.normal();
    xp(i) = t.x_par[i];
  }
  std::vector<double> xs(x.data(), x.data() + 12);
  const auto lc = local_coordinates(xs, t);
  const Eigen::VectorXd d = x - xp;
  CHECK(std::abs(lc.w_perp_norm - (d - q * (q.transpose() * d)).norm()) < 1e-8);
  Eigen::VectorXd wp(3);
  for (int k = 0; k < 3; ++k) wp(k) = lc.w_par[k];
  CHECK(std::abs(wp.norm() - (q.transpose() * xp).norm()) < 1e-8);
  Eigen::JacobiSVD<Eigen::MatrixXd> es(ae);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(t.s[k] - es.singularValues()(k)) < 1e-8);
}
