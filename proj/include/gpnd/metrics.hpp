#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Detection metrics with inliers as the positive class and "score >= gamma"
// as the inlier prediction. All of them reject single-class inputs with
// std::invalid_argument.

namespace gpnd::eval {

enum class Label : std::uint8_t { inlier = 0, outlier = 1 };

struct ScoredSet {
  std::vector<double> scores;
  std::vector<Label> labels;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Counts with "score >= gamma" predicted inlier.
Confusion confusion_at(const ScoredSet& set, double gamma);

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1(const ScoredSet& set, double gamma);

/// P(inlier score > outlier score) + 0.5 P(tie).
double auroc(const ScoredSet& set);

/// FPR at the largest threshold whose TPR reaches `tpr_target`.
double fpr_at_tpr(const ScoredSet& set, double tpr_target = 0.95);

/// 0.5 (1 - TPR) + 0.5 FPR at the fpr_at_tpr operating point.
double detection_error(const ScoredSet& set, double tpr_target = 0.95);

/// Step-wise average precision, sum over thresholds of
/// (recall_k - recall_{k-1}) * precision_k. For Label::outlier the scores are
/// negated and outliers become the positives.
double aupr(const ScoredSet& set, Label positives);

/// F1-maximizing threshold. Candidates are the midpoints between consecutive
/// distinct scores plus -inf and +inf; ties go to the larger threshold.
double select_threshold(const ScoredSet& set);

struct MetricsReport {
  double f1 = 0.0;
  double auroc = 0.0;
  double fpr_at_95tpr = 0.0;
  double detection_error = 0.0;
  double aupr_in = 0.0;
  double aupr_out = 0.0;
  double threshold = 0.0;
  std::size_t inliers = 0;
  std::size_t outliers = 0;
};

/// All six metrics; F1 is evaluated at `gamma`.
MetricsReport compute_metrics(const ScoredSet& set, double gamma);

}  // namespace gpnd::eval
