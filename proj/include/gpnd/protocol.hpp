#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gpnd/aae.hpp"
#include "gpnd/config.hpp"
#include "gpnd/data.hpp"
#include "gpnd/detector.hpp"
#include "gpnd/metrics.hpp"

namespace gpnd::eval {

inline constexpr std::size_t kFoldCount = 5;

/// One fold of the per-class protocol. Every class is shuffled with its own
/// seeded permutation and cut into five contiguous 20% blocks; fold k tests
/// on block k, validates on block (k + 1) mod 5 and trains on the rest.
/// Outlier pools are the matching blocks of the other classes, so test and
/// validation outliers never overlap.
struct FoldSplit {
  std::vector<std::size_t> train;              // inlier class, capped at max_train
  std::vector<std::size_t> validation;         // inlier class
  std::vector<std::size_t> test;               // inlier class
  std::vector<std::size_t> validation_donors;  // other classes
  std::vector<std::size_t> test_donors;        // other classes
};

/// Throws DataError when the class is missing, has no other class to draw
/// outliers from, or is too small for five blocks and 100 training samples.
FoldSplit fold_split(const data::Dataset& corpus, int inlier_class, std::size_t fold, std::size_t max_train,
                     Seed seed);

/// Seed of the model trained in `fold`; fold 0 uses the top-level seed.
Seed fold_seed(Seed seed, std::size_t fold);

struct TrainedDetector {
  detector::DetectorModel model;
  aae::TrainingHistory history;
  detector::DensityFit fit;
};

/// Trains the AAE on `train`, fits p_Z and the residual histogram. The
/// threshold is left unset.
TrainedDetector build_detector(const Matrix& train, const config::RunConfig& cfg, Seed model_seed);

/// Inliers followed by sampled donors; labels attached.
ScoredSet labeled_scores(const std::vector<density::NoveltyScore>& inlier_scores,
                         const std::vector<density::NoveltyScore>& outlier_scores, detector::ScoringMode mode);

struct ProtocolEntry {
  std::size_t fold = 0;
  double ratio = 0.0;
  detector::ScoringMode mode = detector::ScoringMode::complete;
  MetricsReport metrics;  // on the test set, F1 at the validation threshold
};

struct MetricSummary {
  double ratio = 0.0;
  detector::ScoringMode mode = detector::ScoringMode::complete;
  std::size_t folds = 0;
  MetricsReport mean;
  MetricsReport stddev;  // sample standard deviation, 0 for a single fold
};

struct FoldInfo {
  std::size_t fold = 0;
  std::size_t train = 0, validation = 0, test = 0;
  aae::EpochLosses final_losses;
  std::size_t degenerate_samples = 0;
};

struct ProtocolReport {
  int inlier_class = 0;
  std::vector<FoldInfo> folds;
  std::vector<ProtocolEntry> entries;    // fold-major, then ratio, then mode
  std::vector<MetricSummary> summary;    // ratio-major, then mode
};

/// Progress messages (one line each) for long runs.
using ProtocolLog = std::function<void(const std::string&)>;

/// Runs the first cfg.folds folds: train, fit densities, pick gamma on the
/// validation block with simulated outliers (at the test ratio, or at
/// cfg.validation_ratio), then score the test block with outliers injected
/// at every ratio. With cfg.ablation all four scoring modes are evaluated,
/// otherwise only cfg.scoring_mode.
ProtocolReport run_protocol(const data::Dataset& corpus, int inlier_class, const config::RunConfig& cfg,
                            const ProtocolLog& log = {});

/// Mean and sample standard deviation of each (ratio, mode) group.
std::vector<MetricSummary> summarize(const std::vector<ProtocolEntry>& entries);

/// Deterministic JSON document of the whole report.
std::string to_json(const ProtocolReport& report, const config::RunConfig& cfg);

}  // namespace gpnd::eval
