#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpnd/aae.hpp"
#include "gpnd/density.hpp"
#include "gpnd/geometry.hpp"
#include "gpnd/metrics.hpp"

namespace gpnd::detector {

/// Which terms make up the decision value.
enum class ScoringMode : std::uint32_t {
  complete = 0,            // log_p_par + log_p_perp
  parallel_only = 1,       // log_p_par
  perpendicular_only = 2,  // log_p_perp
  pz_only = 3,             // log p_Z(z_bar), without the singular-value factor
};

inline constexpr ScoringMode kAllModes[] = {ScoringMode::complete, ScoringMode::parallel_only,
                                            ScoringMode::perpendicular_only, ScoringMode::pz_only};

std::string to_string(ScoringMode m);
ScoringMode scoring_mode_from_string(const std::string& s);

struct DetectorModel {
  aae::AaeModel aae;
  density::LatentDensityModel latent_density;
  density::ResidualNormHistogram residual_hist;
  std::optional<double> threshold;  // log domain; unset until selected
  ScoringMode scoring_mode = ScoringMode::complete;
  density::PerpExponent perp_exponent = density::PerpExponent::codimension;
  double jacobian_step = geometry::kDefaultJacobianStep;

  std::size_t ambient_dim() const { return aae.ambient_dim(); }
  std::size_t latent_dim() const { return aae.latent_dim(); }
  bool operator==(const DetectorModel&) const = default;
};

/// Dimensional consistency across the bundled sub-models.
void validate(const DetectorModel& model);

struct DensityFit {
  density::LatentDensityModel latent;
  density::ResidualNormHistogram hist;
  std::vector<bool> clamped_dims;  // beta pinned to a bound during the fit
  std::size_t degenerate_samples = 0;
};

/// Fits p_Z on the encodings g(x_i) and the histogram of |w_perp| computed at
/// z_bar = g(x_i). Needs at least 100 samples; a constant latent dimension is
/// reported by index in a NumericError.
DensityFit fit_densities(const aae::AaeModel& aae, const Matrix& inliers, std::size_t bins = 100,
                         double jacobian_step = geometry::kDefaultJacobianStep);

/// Full scoring path: encode, linearize the decoder at z_bar, take tangent
/// coordinates and combine the parallel and perpendicular log densities.
density::NoveltyScore score(const DetectorModel& model, std::span<const double> x);

/// Scores every row, fanning out over OpenMP workers; output order follows
/// input order and values do not depend on the worker count.
std::vector<density::NoveltyScore> score_batch(const DetectorModel& model, const Matrix& x);

/// Single-threaded reference for score_batch.
std::vector<density::NoveltyScore> score_batch_serial(const DetectorModel& model, const Matrix& x);

double decision_value(const density::NoveltyScore& s, ScoringMode mode);

enum class Decision { inlier, outlier };

/// decision_value >= threshold => inlier. Throws std::logic_error when the
/// model has no threshold.
Decision classify(const DetectorModel& model, std::span<const double> x);
Decision classify(const DetectorModel& model, const density::NoveltyScore& s);

/// F1-optimal threshold on labeled decision values (see eval::select_threshold).
double select_threshold(std::span<const double> scores, std::span<const eval::Label> labels);

/// Binary model file; layout documented in docs/model_format.md.
std::vector<std::uint8_t> serialize(const DetectorModel& model);
DetectorModel deserialize(std::span<const std::uint8_t> bytes);
void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace gpnd::detector
