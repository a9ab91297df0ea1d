#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gpnd::density {

/// ln Gamma(x) for x > 0. Lanczos approximation (g = 7, 9 coefficients) with
/// the reflection formula below 0.5.
double log_gamma(double x);

/// Generalized Gaussian on one axis: density
///   beta / (2 alpha Gamma(1/beta)) * exp(-(|x - mu| / alpha)^beta).
struct GeneralizedGaussian {
  double mu = 0.0;
  double alpha = 1.0;
  double beta = 2.0;
  bool operator==(const GeneralizedGaussian&) const = default;
};

/// Outcome of a moment-matching fit. `clamped` is set when the
/// mean-absolute-deviation ratio fell outside what beta in [0.1, 10] can
/// produce and beta was pinned to the bound.
struct GgFit {
  GeneralizedGaussian params;
  bool clamped = false;
};

inline constexpr double kMinBeta = 0.1;
inline constexpr double kMaxBeta = 10.0;

/// mu = sample mean; beta solves
///   E|x-mu| / sqrt(E(x-mu)^2) = Gamma(2/b) / sqrt(Gamma(1/b) Gamma(3/b))
/// by bisection on [0.1, 10]; alpha = sqrt(E(x-mu)^2 Gamma(1/b) / Gamma(3/b)).
/// Needs at least 30 samples with nonzero variance (NumericError otherwise).
GgFit fit_generalized_gaussian(std::span<const double> samples);

/// Product of independent per-dimension generalized Gaussians for p_Z.
struct LatentDensityModel {
  std::vector<GeneralizedGaussian> dims;
  bool operator==(const LatentDensityModel&) const = default;
};

/// sum_j [ln b_j - ln(2 a_j) - lnGamma(1/b_j) - (|z_j - mu_j| / a_j)^b_j]
double log_pdf_gg(const LatentDensityModel& model, std::span<const double> z);
double log_pdf_gg(const GeneralizedGaussian& p, double z);

/// Equal-width histogram of residual norms on [0, edges.back()).
struct ResidualNormHistogram {
  std::vector<double> edges;      // B + 1, ascending, edges[0] = 0
  std::vector<double> densities;  // B
  double floor_density = 0.0;     // used for empty bins and out-of-range queries
  double r_min = 0.0;             // smallest usable radius in the ln r term
  bool operator==(const ResidualNormHistogram&) const = default;
};

/// Bins span [0, max * (1 + 1e-6)); density = count / (N * width);
/// floor_density = 1 / (N * width * 10); r_min = 1e-3 * smallest positive
/// norm. When every norm is zero the support is [0, 1). An explicit `upper`
/// edge replaces max * (1 + 1e-6); it must exceed every norm.
ResidualNormHistogram build_residual_histogram(std::span<const double> norms, std::size_t bins,
                                               std::optional<double> upper = std::nullopt);

/// ln density of the bin containing r (bins are half-open [lo, hi)), or
/// ln floor_density for empty bins and r outside the support.
double eval_log_hist(const ResidualNormHistogram& hist, double r);

/// -sum ln s_i + log_pz.
double log_parallel_density(std::span<const double> singular_values, double log_pz);

/// Power of |w_perp| in the sphere-average denominator: `codimension` uses m - n,
/// `surface_area` uses m - n - 1 (the area of the sphere S^{m-n-1}).
enum class PerpExponent : std::uint32_t { codimension = 0, surface_area = 1 };

std::string to_string(PerpExponent e);
PerpExponent perp_exponent_from_string(const std::string& s);

/// lnGamma(k/2) - ln 2 - (k/2) ln pi - e ln max(r, r_min) + log_radial,
/// k = m - n and e = k (codimension) or k - 1 (surface_area).
double log_perpendicular_density(double r, std::size_t m, std::size_t n, double log_radial, double r_min,
                                 PerpExponent exponent = PerpExponent::codimension);

/// Same, with log_radial = eval_log_hist(hist, r) and r_min from the histogram.
double log_perpendicular_density(double r, std::size_t m, std::size_t n, const ResidualNormHistogram& hist,
                                 PerpExponent exponent = PerpExponent::codimension);

/// Per-sample score; every term is kept for the ablation modes.
struct NoveltyScore {
  double log_p_par = 0.0;   // ln p_W_par(w_par)
  double log_p_perp = 0.0;  // ln p_W_perp(w_perp)
  double log_p_x = 0.0;     // log_p_par + log_p_perp
  double log_pz = 0.0;      // ln p_Z(z_bar)
  double log_det = 0.0;     // -sum ln s_i
  double log_radial = 0.0;  // ln p_|W_perp|(|w_perp|)
  double w_perp_norm = 0.0;
  bool degenerate = false;
  bool operator==(const NoveltyScore&) const = default;
};

NoveltyScore assemble_score(double log_p_par, double log_p_perp);

}  // namespace gpnd::density
