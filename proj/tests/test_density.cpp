#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpnd/density.hpp"
#include "gpnd/errors.hpp"
#include "gpnd/rng.hpp"

using namespace gpnd;
using namespace gpnd::density;

TEST_CASE("log_gamma special values and recurrence") {
  CHECK(std::abs(log_gamma(1.0)) < 1e-12);
  CHECK(std::abs(log_gamma(2.0)) < 1e-12);
  CHECK(std::abs(log_gamma(0.5) - 0.5723649429247001) < 1e-10);
  for (double x : {0.3, 2.7, 11.0}) CHECK(std::abs(log_gamma(x + 1) - log_gamma(x) - std::log(x)) < 1e-10);
  for (double x : {0.01, 0.2, 1.5, 7.25, 33.3, 99.0}) CHECK(std::abs(log_gamma(x) - std::lgamma(x)) < 1e-10);
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("generalized Gaussian fit on normal samples") {
  Rng rng(Seed{101});
  std::vector<double> s(100000);
  for (auto& v : s) v = rng.normal();
  const auto fit = fit_generalized_gaussian(s);
  CHECK(fit.params.beta >= 1.85);
  CHECK(fit.params.beta <= 2.15);
  CHECK(fit.params.alpha >= 1.35);
  CHECK(fit.params.alpha <= 1.48);
  CHECK(std::abs(fit.params.mu) <= 0.02);
  CHECK_FALSE(fit.clamped);
}

TEST_CASE("generalized Gaussian fit on Laplace samples") {
  Rng rng(Seed{102});
  std::vector<double> s(100000);
  for (auto& v : s) {
    const double u = rng.uniform() - 0.5;
    v = -std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::abs(u));
  }
  const auto fit = fit_generalized_gaussian(s);
  CHECK(fit.params.beta >= 0.9);
  CHECK(fit.params.beta <= 1.1);
}

TEST_CASE("generalized Gaussian fit errors and clamping") {
  CHECK_THROWS_AS(fit_generalized_gaussian(std::vector<double>(100, 3.0)), NumericError);
  CHECK_THROWS_AS(fit_generalized_gaussian(std::vector<double>(10, 1.0)), NumericError);
  // Two-point distribution: ratio 1, beyond any beta <= 10.
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(i % 2 ? 1.0 : -1.0);
  const auto fit = fit_generalized_gaussian(s);
  CHECK(fit.clamped);
  CHECK(fit.params.beta == kMaxBeta);
}

TEST_CASE("log_pdf_gg special cases") {
  CHECK(log_pdf_gg(GeneralizedGaussian{0, std::sqrt(2.0), 2}, 0.0) ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-12));
  CHECK(log_pdf_gg(GeneralizedGaussian{0, 1, 1}, 0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  const LatentDensityModel m{{{0.1, 1.2, 1.7}, {-0.3, 0.8, 3.0}}};
  const std::vector<double> z{0.4, 0.2};
  CHECK(log_pdf_gg(m, z) == log_pdf_gg(m.dims[0], 0.4) + log_pdf_gg(m.dims[1], 0.2));
  CHECK_THROWS_AS(log_pdf_gg(m, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("generalized Gaussian density integrates to one") {
  for (double beta : {1.0, 2.0, 4.0}) {
    const GeneralizedGaussian p{0.3, 1.1, beta};
    // Composite Simpson on [-20, 20]; the kink at mu is a node.
    const int n = 400000;
    const double a = -20 + 0.3, b = 20 + 0.3, h = (b - a) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      s += w * std::exp(log_pdf_gg(p, a + i * h));
    }
    CHECK(std::abs(s * h / 3 - 1.0) < 1e-4);
  }
}

TEST_CASE("histogram examples") {
  const auto one = build_residual_histogram(std::vector<double>(5, 2.0), 1);
  REQUIRE(one.densities.size() == 1);
  CHECK(one.densities[0] * (one.edges[1] - one.edges[0]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.densities[0] == doctest::Approx(1.0 / (2.0 * (1 + 1e-6))));

  const auto two = build_residual_histogram(std::vector<double>{0.5, 1.5}, 2, 2.0);
  CHECK(two.edges == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(two.densities == std::vector<double>{0.5, 0.5});
  CHECK(two.floor_density == doctest::Approx(1.0 / (2 * 1.0 * 10)));
  CHECK(two.r_min == doctest::Approx(0.5e-3));

  CHECK_THROWS_AS(build_residual_histogram(std::vector<double>{1.0, -0.1}, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_residual_histogram(std::vector<double>{}, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_residual_histogram(std::vector<double>{1.0}, 4, 1.0), std::invalid_argument);
}

TEST_CASE("histogram mass sums to one") {
  Rng rng(Seed{5});
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> norms(1 + rng.below(300));
    for (auto& v : norms) v = std::abs(rng.normal()) * rng.uniform(0.01, 10.0);
    const auto h = build_residual_histogram(norms, 1 + rng.below(120));
    double mass = 0.0;
    for (std::size_t i = 0; i < h.densities.size(); ++i) mass += h.densities[i] * (h.edges[i + 1] - h.edges[i]);
    bad += std::abs(mass - 1.0) > 1e-9;
    for (std::size_t i = 1; i < h.edges.size(); ++i) bad += !(h.edges[i] > h.edges[i - 1]);
  }
  CHECK(bad == 0);
}

TEST_CASE("histogram lookup rules") {
  const auto h = build_residual_histogram(std::vector<double>{0.5, 1.5, 1.6, 3.5}, 4, 4.0);
  // densities: [0,1): 1/4, [1,2): 2/4, [2,3): 0, [3,4): 1/4
  CHECK(eval_log_hist(h, 1.2) == doctest::Approx(std::log(0.5)));
  CHECK(eval_log_hist(h, 1.0) == doctest::Approx(std::log(0.5)));  // edge goes right
  CHECK(eval_log_hist(h, 0.999) == doctest::Approx(std::log(0.25)));
  CHECK(eval_log_hist(h, 2.5) == std::log(h.floor_density));       // empty bin
  CHECK(eval_log_hist(h, 4.0) == std::log(h.floor_density));       // beyond support
  CHECK(eval_log_hist(h, 100.0) == std::log(h.floor_density));
}

TEST_CASE("parallel density") {
  const std::vector<double> ones{1, 1, 1};
  CHECK(log_parallel_density(ones, -3.2) == -3.2);
  CHECK(log_parallel_density(std::vector<double>{2, 0.5}, -3.2) == doctest::Approx(-3.2));
  CHECK(log_parallel_density(std::vector<double>{10, 10}, -3.2) == doctest::Approx(-3.2 - 2 * std::log(10.0)));
}

TEST_CASE("perpendicular density") {
  CHECK(log_perpendicular_density(1.0, 5, 3, std::log(0.5), 1e-6) ==
        doctest::Approx(-std::log(2 * std::numbers::pi) + std::log(0.5)));
  CHECK(log_perpendicular_density(1.0, 4, 3, std::log(0.3), 1e-6) == doctest::Approx(std::log(0.3 / 2)));
  double prev = INFINITY;
  for (double r = 0.1; r < 5; r += 0.1) {
    const double v = log_perpendicular_density(r, 10, 3, -1.0, 1e-6);
    CHECK(v < prev);
    prev = v;
  }
  // r below r_min uses r_min; surface_area drops one power of r.
  CHECK(log_perpendicular_density(0.0, 10, 3, 0.0, 1e-3) == log_perpendicular_density(1e-3, 10, 3, 0.0, 1e-3));
  CHECK(log_perpendicular_density(2.0, 10, 3, 0.0, 1e-3, PerpExponent::surface_area) -
            log_perpendicular_density(2.0, 10, 3, 0.0, 1e-3, PerpExponent::codimension) ==
        doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(log_perpendicular_density(1.0, 3, 3, 0.0, 1e-3), std::invalid_argument);

  const auto h = build_residual_histogram(std::vector<double>{0.5, 1.5}, 2, 2.0);
  CHECK(log_perpendicular_density(1.2, 6, 2, h) ==
        log_perpendicular_density(1.2, 6, 2, std::log(0.5), h.r_min));
}

TEST_CASE("surface_area exponent with the exact chi density recovers an isotropic Gaussian") {
  // x_perp ~ N(0, s^2 I_k): |x_perp| has the chi density; the sphere average
  // then gives back the Gaussian density exactly.
  const std::size_t k = 7;
  const double s = 0.3;
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const double kk = static_cast<double>(k);
    const double log_chi = (kk - 1) * std::log(r) - r * r / (2 * s * s) - (kk / 2 - 1) * std::log(2.0) -
                           log_gamma(kk / 2) - kk * std::log(s);
    const double got = log_perpendicular_density(r, k + 2, 2, log_chi, 1e-9, PerpExponent::surface_area);
    const double want = -0.5 * kk * std::log(2 * std::numbers::pi * s * s) - r * r / (2 * s * s);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("flat histogram: score ordering follows the closed form") {
  // m - n = 2, flat radial density, so log p_x = -sum ln s + log_pz - 2 ln r + const.
  Rng rng(Seed{9});
  const std::size_t m = 5, n = 3;
  std::vector<double> direct, assembled;
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> s{rng.uniform(0.5, 3), rng.uniform(0.2, 2), rng.uniform(0.1, 1)};
    const double log_pz = rng.normal(), r = rng.uniform(0.05, 2.0);
    const double par = log_parallel_density(s, log_pz);
    const double perp = log_perpendicular_density(r, m, n, std::log(0.25), 1e-6);
    assembled.push_back(assemble_score(par, perp).log_p_x);
    direct.push_back(-std::log(s[0]) - std::log(s[1]) - std::log(s[2]) + log_pz - 2 * std::log(r));
  }
  for (std::size_t i = 0; i < direct.size(); ++i)
    for (std::size_t j = 0; j < direct.size(); ++j)
      if (std::abs(direct[i] - direct[j]) > 1e-9) CHECK((direct[i] < direct[j]) == (assembled[i] < assembled[j]));
}

TEST_CASE("assemble_score") {
  const auto s = assemble_score(-1.0, -2.0);
  CHECK(s.log_p_x == -3.0);
  CHECK(s.log_p_par == -1.0);
  CHECK(s.log_p_perp == -2.0);
  CHECK(assemble_score(0.0, 0.0).log_p_x == 0.0);
  CHECK(to_string(perp_exponent_from_string("surface_area")) == "surface_area");
  CHECK_THROWS_AS(perp_exponent_from_string("bogus"), std::invalid_argument);
}
