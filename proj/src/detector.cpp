#include "gpnd/detector.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gpnd/errors.hpp"

namespace gpnd::detector {

std::string to_string(ScoringMode m) {
  switch (m) {
    case ScoringMode::complete: return "complete";
    case ScoringMode::parallel_only: return "parallel_only";
    case ScoringMode::perpendicular_only: return "perpendicular_only";
    case ScoringMode::pz_only: return "pz_only";
  }
  return "?";
}

ScoringMode scoring_mode_from_string(const std::string& s) {
  for (auto m : kAllModes)
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown scoring mode '" + s +
                              "' (expected complete, parallel_only, perpendicular_only or pz_only)");
}

void validate(const DetectorModel& model) {
  aae::validate(model.aae);
  const std::size_t n = model.latent_dim();
  if (model.latent_density.dims.size() != n) throw DataError("latent density dimension does not match the encoder");
  for (const auto& d : model.latent_density.dims)
    if (!(d.alpha > 0.0) || !(d.beta > 0.0) || !std::isfinite(d.mu) || !std::isfinite(d.alpha) ||
        !std::isfinite(d.beta))
      throw DataError("invalid generalized Gaussian parameters");
  const auto& h = model.residual_hist;
  if (h.edges.size() != h.densities.size() + 1 || h.densities.empty()) throw DataError("malformed histogram");
  for (std::size_t i = 1; i < h.edges.size(); ++i)
    if (!(h.edges[i] > h.edges[i - 1])) throw DataError("histogram edges not strictly increasing");
  if (!(h.floor_density > 0.0) || !(h.r_min > 0.0)) throw DataError("histogram floor density and r_min must be > 0");
  if (!(model.jacobian_step > 0.0)) throw DataError("jacobian step must be positive");
}

DensityFit fit_densities(const aae::AaeModel& model, const Matrix& inliers, std::size_t bins, double jacobian_step) {
  aae::validate(model);
  if (inliers.rows < 100) throw std::invalid_argument("fit_densities: need at least 100 inlier samples");
  if (inliers.cols != model.ambient_dim()) throw std::invalid_argument("fit_densities: sample dimension mismatch");

  const Matrix z = aae::encode(model, inliers);
  const std::size_t n = z.cols;
  DensityFit fit;
  fit.latent.dims.resize(n);
  fit.clamped_dims.assign(n, false);
  std::vector<std::size_t> constant_dims;
  std::vector<double> column(z.rows);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < z.rows; ++i) column[i] = z(i, j);
    try {
      const auto gg = density::fit_generalized_gaussian(column);
      fit.latent.dims[j] = gg.params;
      fit.clamped_dims[j] = gg.clamped;
    } catch (const NumericError&) {
      constant_dims.push_back(j);
    }
  }
  if (!constant_dims.empty()) {
    std::ostringstream os;
    os << "fit_densities: degenerate latent dimension(s):";
    for (auto j : constant_dims) os << ' ' << j;
    throw NumericError(os.str());
  }

  std::vector<double> norms(inliers.rows);
  std::size_t degenerate = 0;
  const auto rows = static_cast<std::ptrdiff_t>(inliers.rows);
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : degenerate)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const auto t = geometry::linearize(model.decoder, z.row(r), jacobian_step);
    norms[r] = geometry::local_coordinates(inliers.row(r), t).w_perp_norm;
    if (t.degenerate) ++degenerate;
  }
  fit.hist = density::build_residual_histogram(norms, bins);
  fit.degenerate_samples = degenerate;
  return fit;
}

namespace {

density::NoveltyScore score_with_latent(const DetectorModel& model, std::span<const double> x,
                                        std::span<const double> z) {
  const auto t = geometry::linearize(model.aae.decoder, z, model.jacobian_step);
  const auto lc = geometry::local_coordinates(x, t);
  const double log_pz = density::log_pdf_gg(model.latent_density, z);
  const double log_par = density::log_parallel_density(t.s, log_pz);
  const double log_radial = density::eval_log_hist(model.residual_hist, lc.w_perp_norm);
  const double log_perp =
      density::log_perpendicular_density(lc.w_perp_norm, model.ambient_dim(), model.latent_dim(), log_radial,
                                         model.residual_hist.r_min, model.perp_exponent);
  auto s = density::assemble_score(log_par, log_perp);
  s.log_pz = log_pz;
  s.log_det = log_par - log_pz;
  s.log_radial = log_radial;
  s.w_perp_norm = lc.w_perp_norm;
  s.degenerate = t.degenerate;
  return s;
}

}  // namespace

density::NoveltyScore score(const DetectorModel& model, std::span<const double> x) {
  if (x.size() != model.ambient_dim()) throw std::invalid_argument("score: sample dimension mismatch");
  const std::vector<double> z = aae::encode(model.aae, x);
  return score_with_latent(model, x, z);
}

std::vector<density::NoveltyScore> score_batch(const DetectorModel& model, const Matrix& x) {
  if (x.cols != model.ambient_dim()) throw std::invalid_argument("score_batch: sample dimension mismatch");
  std::vector<density::NoveltyScore> out(x.rows);
  const auto rows = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out[r] = score(model, x.row(r));
  }
  return out;
}

std::vector<density::NoveltyScore> score_batch_serial(const DetectorModel& model, const Matrix& x) {
  if (x.cols != model.ambient_dim()) throw std::invalid_argument("score_batch: sample dimension mismatch");
  std::vector<density::NoveltyScore> out(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) out[r] = score(model, x.row(r));
  return out;
}

double decision_value(const density::NoveltyScore& s, ScoringMode mode) {
  switch (mode) {
    case ScoringMode::complete: return s.log_p_x;
    case ScoringMode::parallel_only: return s.log_p_par;
    case ScoringMode::perpendicular_only: return s.log_p_perp;
    case ScoringMode::pz_only: return s.log_pz;
  }
  return s.log_p_x;
}

Decision classify(const DetectorModel& model, const density::NoveltyScore& s) {
  if (!model.threshold) throw std::logic_error("classify: detector has no threshold");
  return decision_value(s, model.scoring_mode) >= *model.threshold ? Decision::inlier : Decision::outlier;
}

Decision classify(const DetectorModel& model, std::span<const double> x) {
  if (!model.threshold) throw std::logic_error("classify: detector has no threshold");
  return classify(model, score(model, x));
}

double select_threshold(std::span<const double> scores, std::span<const eval::Label> labels) {
  eval::ScoredSet set{{scores.begin(), scores.end()}, {labels.begin(), labels.end()}};
  return eval::select_threshold(set);
}

}  // namespace gpnd::detector
