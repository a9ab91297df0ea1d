#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpnd/aae.hpp"
#include "gpnd/data.hpp"
#include "gpnd/density.hpp"
#include "gpnd/detector.hpp"
#include "gpnd/rng.hpp"

namespace gpnd::config {

/// Bad key, value or combination in a run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every tunable of a run. The text form is flat "key = value" lines; '#'
/// starts a comment, blank lines are ignored and unknown keys are errors.
struct RunConfig {
  // model
  std::size_t latent_dim = 16;
  std::size_t hidden_dim = 256;
  // training
  std::size_t epochs = 80;
  std::size_t batch_size = 128;
  double learning_rate = 0.002;
  double lambda_recon = 2.0;
  double disc_z_weight = 2.0;
  // scoring
  std::size_t hist_bins = 100;
  double jacobian_step = 1e-4;
  density::PerpExponent perp_exponent = density::PerpExponent::codimension;
  detector::ScoringMode scoring_mode = detector::ScoringMode::complete;
  // protocol
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t folds = 5;          // first k of the fixed 5-way partition
  std::size_t max_train = 0;      // 0 keeps the whole training block
  std::optional<double> validation_ratio;  // unset: match the test ratio
  bool ablation = true;           // evaluate all four scoring modes
  Seed seed{0};
  // synthetic data (generate)
  data::SyntheticManifoldConfig synthetic;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);
/// Canonical text form; parse(format(c)) == c.
std::string format(const RunConfig& cfg);

/// Range checks against the preconditions of the modules the values feed.
void validate(const RunConfig& cfg);

/// Sets one key from its text value; throws ConfigError naming the key.
void set(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> known_keys();

aae::Architecture architecture(const RunConfig& cfg, std::size_t ambient_dim);
aae::TrainingConfig training(const RunConfig& cfg, Seed model_seed);

}  // namespace gpnd::config
