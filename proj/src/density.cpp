#include "gpnd/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gpnd/errors.hpp"

namespace gpnd::density {

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("log_gamma: argument must be positive and finite");
  static constexpr double kG = 7.0;
  static constexpr double kCoef[9] = {0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
                                      771.32342877765313,      -176.61502916214059,   12.507343278686905,
                                      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  double a = kCoef[0];
  const double t = xm + kG + 0.5;
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (xm + static_cast<double>(i));
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) - t + std::log(a);
}

namespace {

// Gamma(2/b) / sqrt(Gamma(1/b) Gamma(3/b)), increasing in b.
double gg_ratio(double b) {
  return std::exp(log_gamma(2.0 / b) - 0.5 * (log_gamma(1.0 / b) + log_gamma(3.0 / b)));
}

}  // namespace

GgFit fit_generalized_gaussian(std::span<const double> samples) {
  if (samples.size() < 30) throw NumericError("fit_generalized_gaussian: need at least 30 samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) {
    if (!std::isfinite(v)) throw NumericError("fit_generalized_gaussian: non-finite sample");
    mean += v;
  }
  mean /= n;
  double m1 = 0.0, m2 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    m1 += std::abs(d);
    m2 += d * d;
  }
  m1 /= n;
  m2 /= n;
  if (!(m2 > 0.0) || m2 <= 1e-24 * std::max(1.0, mean * mean))
    throw NumericError("fit_generalized_gaussian: zero-variance samples");

  const double target = m1 / std::sqrt(m2);
  GgFit fit;
  double beta;
  if (target <= gg_ratio(kMinBeta)) {
    beta = kMinBeta;
    fit.clamped = true;
  } else if (target >= gg_ratio(kMaxBeta)) {
    beta = kMaxBeta;
    fit.clamped = true;
  } else {
    double lo = kMinBeta, hi = kMaxBeta;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (gg_ratio(mid) < target ? lo : hi) = mid;
    }
    beta = 0.5 * (lo + hi);
  }
  const double alpha = std::sqrt(m2 * std::exp(log_gamma(1.0 / beta) - log_gamma(3.0 / beta)));
  fit.params = {mean, alpha, beta};
  return fit;
}

double log_pdf_gg(const GeneralizedGaussian& p, double z) {
  return std::log(p.beta) - std::log(2.0 * p.alpha) - log_gamma(1.0 / p.beta) -
         std::pow(std::abs(z - p.mu) / p.alpha, p.beta);
}

double log_pdf_gg(const LatentDensityModel& model, std::span<const double> z) {
  if (z.size() != model.dims.size()) throw std::invalid_argument("log_pdf_gg: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += log_pdf_gg(model.dims[j], z[j]);
  return s;
}

ResidualNormHistogram build_residual_histogram(std::span<const double> norms, std::size_t bins,
                                               std::optional<double> upper) {
  if (norms.empty()) throw std::invalid_argument("build_residual_histogram: no norms");
  if (bins == 0) throw std::invalid_argument("build_residual_histogram: need at least one bin");
  double max = 0.0;
  double min_pos = std::numeric_limits<double>::infinity();
  for (double r : norms) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("build_residual_histogram: negative norm");
    max = std::max(max, r);
    if (r > 0.0) min_pos = std::min(min_pos, r);
  }
  double hi = max > 0.0 ? max * (1.0 + 1e-6) : 1.0;
  if (upper) {
    if (!(*upper > max) || !std::isfinite(*upper))
      throw std::invalid_argument("build_residual_histogram: upper edge must exceed every norm");
    hi = *upper;
  }
  const double width = hi / static_cast<double>(bins);
  const double total = static_cast<double>(norms.size());

  ResidualNormHistogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = width * static_cast<double>(i);
  h.edges.back() = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double r : norms) {
    auto b = static_cast<std::size_t>(r / width);
    // Guard against rounding at the upper end of a bin.
    while (b > 0 && r < h.edges[b]) --b;
    while (b + 1 < bins && r >= h.edges[b + 1]) ++b;
    counts[std::min(b, bins - 1)] += 1;
  }
  h.densities.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) h.densities[i] = static_cast<double>(counts[i]) / (total * width);
  h.floor_density = 1.0 / (total * width * 10.0);
  h.r_min = std::isfinite(min_pos) ? min_pos * 1e-3 : std::numeric_limits<double>::min();
  return h;
}

double eval_log_hist(const ResidualNormHistogram& h, double r) {
  if (h.densities.empty() || !(r >= h.edges.front()) || !(r < h.edges.back())) return std::log(h.floor_density);
  // Last edge <= r identifies the bin.
  const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), r);
  const auto bin = static_cast<std::size_t>(std::distance(h.edges.begin(), it)) - 1;
  const double d = h.densities[bin];
  return d > 0.0 ? std::log(d) : std::log(h.floor_density);
}

double log_parallel_density(std::span<const double> singular_values, double log_pz) {
  double s = log_pz;
  for (double v : singular_values) s -= std::log(v);
  return s;
}

std::string to_string(PerpExponent e) { return e == PerpExponent::codimension ? "codimension" : "surface_area"; }

PerpExponent perp_exponent_from_string(const std::string& s) {
  if (s == "codimension") return PerpExponent::codimension;
  if (s == "surface_area") return PerpExponent::surface_area;
  throw std::invalid_argument("perp_exponent must be 'codimension' or 'surface_area', got '" + s + "'");
}

double log_perpendicular_density(double r, std::size_t m, std::size_t n, double log_radial, double r_min,
                                 PerpExponent exponent) {
  if (m <= n) throw std::invalid_argument("log_perpendicular_density: need m > n");
  const double k = static_cast<double>(m - n);
  const double e = exponent == PerpExponent::codimension ? k : k - 1.0;
  const double rr = std::max(r, r_min);
  return log_gamma(0.5 * k) - std::numbers::ln2 - 0.5 * k * std::log(std::numbers::pi) - e * std::log(rr) +
         log_radial;
}

double log_perpendicular_density(double r, std::size_t m, std::size_t n, const ResidualNormHistogram& hist,
                                 PerpExponent exponent) {
  return log_perpendicular_density(r, m, n, eval_log_hist(hist, r), hist.r_min, exponent);
}

NoveltyScore assemble_score(double log_p_par, double log_p_perp) {
  NoveltyScore s;
  s.log_p_par = log_p_par;
  s.log_p_perp = log_p_perp;
  s.log_p_x = log_p_par + log_p_perp;
  return s;
}

}  // namespace gpnd::density
