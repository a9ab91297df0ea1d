#include "gpnd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gpnd::eval {

namespace {

struct ClassCounts {
  std::size_t inliers = 0, outliers = 0;
};

ClassCounts check(const ScoredSet& set) {
  if (set.scores.size() != set.labels.size()) throw std::invalid_argument("scores and labels differ in length");
  ClassCounts c;
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    if (!std::isfinite(set.scores[i]) && !std::isinf(set.scores[i]))
      throw std::invalid_argument("NaN score at index " + std::to_string(i));
    (set.labels[i] == Label::inlier ? c.inliers : c.outliers) += 1;
  }
  if (c.inliers == 0 || c.outliers == 0) throw std::invalid_argument("metrics need both inliers and outliers");
  return c;
}

// Distinct score levels in descending order with the class counts at each.
struct Level {
  double score;
  std::size_t inliers;
  std::size_t outliers;
};

std::vector<Level> levels_descending(const ScoredSet& set) {
  std::vector<std::size_t> idx(set.scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });
  std::vector<Level> out;
  for (std::size_t i : idx) {
    if (out.empty() || out.back().score != set.scores[i]) out.push_back({set.scores[i], 0, 0});
    (set.labels[i] == Label::inlier ? out.back().inliers : out.back().outliers) += 1;
  }
  return out;
}

double f1_from(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

struct OperatingPoint {
  double tpr;
  double fpr;
};

OperatingPoint point_at_tpr(const ScoredSet& set, double target) {
  const ClassCounts c = check(set);
  std::size_t tp = 0, fp = 0;
  for (const Level& l : levels_descending(set)) {
    tp += l.inliers;
    fp += l.outliers;
    const double tpr = static_cast<double>(tp) / static_cast<double>(c.inliers);
    if (tpr >= target) return {tpr, static_cast<double>(fp) / static_cast<double>(c.outliers)};
  }
  return {1.0, 1.0};
}

}  // namespace

Confusion confusion_at(const ScoredSet& set, double gamma) {
  check(set);
  Confusion c;
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    const bool predicted_inlier = set.scores[i] >= gamma;
    if (set.labels[i] == Label::inlier) {
      (predicted_inlier ? c.tp : c.fn) += 1;
    } else {
      (predicted_inlier ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

double f1(const ScoredSet& set, double gamma) {
  const Confusion c = confusion_at(set, gamma);
  return f1_from(c.tp, c.fp, c.fn);
}

double auroc(const ScoredSet& set) {
  const ClassCounts c = check(set);
  // Twice the Mann-Whitney U statistic, kept integral.
  std::size_t twice_u = 0;
  std::size_t outliers_below = c.outliers;
  for (const Level& l : levels_descending(set)) {
    outliers_below -= l.outliers;
    twice_u += 2 * l.inliers * outliers_below + l.inliers * l.outliers;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(c.inliers) * static_cast<double>(c.outliers));
}

double fpr_at_tpr(const ScoredSet& set, double tpr_target) { return point_at_tpr(set, tpr_target).fpr; }

double detection_error(const ScoredSet& set, double tpr_target) {
  const OperatingPoint p = point_at_tpr(set, tpr_target);
  return 0.5 * (1.0 - p.tpr) + 0.5 * p.fpr;
}

double aupr(const ScoredSet& set, Label positives) {
  check(set);
  ScoredSet s = set;
  if (positives == Label::outlier) {
    for (auto& v : s.scores) v = -v;
    for (auto& l : s.labels) l = l == Label::inlier ? Label::outlier : Label::inlier;
  }
  const ClassCounts c = check(s);
  std::size_t tp = 0, fp = 0;
  double ap = 0.0;
  for (const Level& l : levels_descending(s)) {
    tp += l.inliers;
    fp += l.outliers;
    if (l.inliers == 0) continue;
    const double recall_step = static_cast<double>(l.inliers) / static_cast<double>(c.inliers);
    ap += recall_step * (static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return ap;
}

double select_threshold(const ScoredSet& set) {
  const ClassCounts c = check(set);
  const auto levels = levels_descending(set);
  // Walk candidates from +inf downwards; replace only on strict improvement so
  // that ties keep the larger threshold.
  double best_gamma = std::numeric_limits<double>::infinity();
  double best = f1_from(0, 0, c.inliers);
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    tp += levels[k].inliers;
    fp += levels[k].outliers;
    double gamma;
    if (k + 1 < levels.size()) {
      gamma = 0.5 * (levels[k].score + levels[k + 1].score);
      if (!(gamma > levels[k + 1].score) || gamma > levels[k].score) gamma = levels[k].score;
    } else {
      gamma = -std::numeric_limits<double>::infinity();
    }
    const double f = f1_from(tp, fp, c.inliers - tp);
    if (f > best) {
      best = f;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

MetricsReport compute_metrics(const ScoredSet& set, double gamma) {
  const ClassCounts c = check(set);
  MetricsReport r;
  r.f1 = f1(set, gamma);
  r.auroc = auroc(set);
  const OperatingPoint p = point_at_tpr(set, 0.95);
  r.fpr_at_95tpr = p.fpr;
  r.detection_error = 0.5 * (1.0 - p.tpr) + 0.5 * p.fpr;
  r.aupr_in = aupr(set, Label::inlier);
  r.aupr_out = aupr(set, Label::outlier);
  r.threshold = gamma;
  r.inliers = c.inliers;
  r.outliers = c.outliers;
  return r;
}

}  // namespace gpnd::eval
