#include "gpnd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "gpnd/errors.hpp"

namespace gpnd::eval {

namespace {

std::vector<std::vector<std::size_t>> blocks_of(std::vector<std::size_t> idx, Seed seed) {
  Rng rng(seed);
  const auto perm = permutation(idx.size(), rng);
  std::vector<std::vector<std::size_t>> blocks(kFoldCount);
  const double n = static_cast<double>(idx.size());
  for (std::size_t b = 0; b < kFoldCount; ++b) {
    const auto lo = static_cast<std::size_t>(std::llround(n * static_cast<double>(b) / kFoldCount));
    const auto hi = static_cast<std::size_t>(std::llround(n * static_cast<double>(b + 1) / kFoldCount));
    for (std::size_t i = lo; i < hi; ++i) blocks[b].push_back(idx[perm[i]]);
  }
  return blocks;
}

}  // namespace

Seed fold_seed(Seed seed, std::size_t fold) {
  return fold == 0 ? seed : Seed{seed.value ^ (static_cast<std::uint64_t>(fold) * 0x9E3779B97F4A7C15ULL)};
}

FoldSplit fold_split(const data::Dataset& corpus, int inlier_class, std::size_t fold, std::size_t max_train,
                     Seed seed) {
  if (fold >= kFoldCount) throw std::invalid_argument("fold index must be below 5");
  const std::set<int> classes(corpus.labels.begin(), corpus.labels.end());
  if (!classes.contains(inlier_class)) throw DataError("class " + std::to_string(inlier_class) + " not in dataset");
  if (classes.size() < 2) throw DataError("dataset needs at least two classes to draw outliers from");

  const std::size_t val_block = (fold + 1) % kFoldCount;
  FoldSplit out;
  for (int c : classes) {
    const auto blocks = blocks_of(data::indices_with_label(corpus, c),
                                  derive(seed, SeedPurpose::folds, static_cast<std::uint64_t>(c)));
    if (c == inlier_class) {
      out.test = blocks[fold];
      out.validation = blocks[val_block];
      for (std::size_t b = 0; b < kFoldCount; ++b)
        if (b != fold && b != val_block) out.train.insert(out.train.end(), blocks[b].begin(), blocks[b].end());
    } else {
      out.test_donors.insert(out.test_donors.end(), blocks[fold].begin(), blocks[fold].end());
      out.validation_donors.insert(out.validation_donors.end(), blocks[val_block].begin(), blocks[val_block].end());
    }
  }
  if (max_train > 0 && out.train.size() > max_train) out.train.resize(max_train);
  if (out.train.size() < 100 || out.validation.empty() || out.test.empty())
    throw DataError("class " + std::to_string(inlier_class) + " too small for a 60/20/20 split with 100 training samples");
  if (out.test_donors.empty() || out.validation_donors.empty())
    throw DataError("other classes too small to supply outliers for every fold");
  return out;
}

TrainedDetector build_detector(const Matrix& train, const config::RunConfig& cfg, Seed model_seed) {
  TrainedDetector out;
  out.model.aae = aae::make_aae(config::architecture(cfg, train.cols), model_seed);
  out.history = aae::train(out.model.aae, train, config::training(cfg, model_seed));
  out.fit = detector::fit_densities(out.model.aae, train, cfg.hist_bins, cfg.jacobian_step);
  out.model.latent_density = out.fit.latent;
  out.model.residual_hist = out.fit.hist;
  out.model.scoring_mode = cfg.scoring_mode;
  out.model.perp_exponent = cfg.perp_exponent;
  out.model.jacobian_step = cfg.jacobian_step;
  return out;
}

ScoredSet labeled_scores(const std::vector<density::NoveltyScore>& inlier_scores,
                         const std::vector<density::NoveltyScore>& outlier_scores, detector::ScoringMode mode) {
  ScoredSet set;
  set.scores.reserve(inlier_scores.size() + outlier_scores.size());
  for (const auto& s : inlier_scores) {
    set.scores.push_back(detector::decision_value(s, mode));
    set.labels.push_back(Label::inlier);
  }
  for (const auto& s : outlier_scores) {
    set.scores.push_back(detector::decision_value(s, mode));
    set.labels.push_back(Label::outlier);
  }
  return set;
}

namespace {

std::vector<density::NoveltyScore> score_rows(const detector::DetectorModel& model, const data::Dataset& corpus,
                                              std::span<const std::size_t> idx) {
  return detector::score_batch(model, gather_rows(corpus.samples, idx));
}

std::vector<density::NoveltyScore> prefix(const std::vector<density::NoveltyScore>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

ProtocolReport run_protocol(const data::Dataset& corpus, int inlier_class, const config::RunConfig& cfg,
                            const ProtocolLog& log) {
  config::validate(cfg);
  data::validate(corpus);
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  std::vector<detector::ScoringMode> modes;
  if (cfg.ablation)
    modes.assign(std::begin(detector::kAllModes), std::end(detector::kAllModes));
  else
    modes.push_back(cfg.scoring_mode);

  ProtocolReport report;
  report.inlier_class = inlier_class;
  for (std::size_t fold = 0; fold < cfg.folds; ++fold) {
    const auto split = fold_split(corpus, inlier_class, fold, cfg.max_train, cfg.seed);
    say("fold " + std::to_string(fold) + ": train " + std::to_string(split.train.size()) + ", validation " +
        std::to_string(split.validation.size()) + ", test " + std::to_string(split.test.size()));

    const Matrix train = gather_rows(corpus.samples, split.train);
    const auto trained = build_detector(train, cfg, fold_seed(cfg.seed, fold));
    say("fold " + std::to_string(fold) + ": trained, densities fitted");

    // Outlier draws are nested across ratios, so the largest draw covers all.
    std::vector<double> val_ratios = cfg.ratios;
    if (cfg.validation_ratio) val_ratios = {*cfg.validation_ratio};
    std::size_t val_k = 0, test_k = 0;
    for (double r : val_ratios) val_k = std::max(val_k, data::outlier_count(split.validation.size(), r));
    for (double r : cfg.ratios) test_k = std::max(test_k, data::outlier_count(split.test.size(), r));
    const auto val_out = data::sample_without_replacement(
        split.validation_donors, val_k, derive(cfg.seed, SeedPurpose::validation_outliers, fold));
    const auto test_out =
        data::sample_without_replacement(split.test_donors, test_k, derive(cfg.seed, SeedPurpose::test_outliers, fold));

    const auto& model = trained.model;
    const auto val_in_s = score_rows(model, corpus, split.validation);
    const auto val_out_s = score_rows(model, corpus, val_out);
    const auto test_in_s = score_rows(model, corpus, split.test);
    const auto test_out_s = score_rows(model, corpus, test_out);
    say("fold " + std::to_string(fold) + ": scored " +
        std::to_string(val_in_s.size() + val_out_s.size() + test_in_s.size() + test_out_s.size()) + " samples");

    FoldInfo info;
    info.fold = fold;
    info.train = split.train.size();
    info.validation = split.validation.size();
    info.test = split.test.size();
    if (!trained.history.epochs.empty()) info.final_losses = trained.history.epochs.back();
    info.degenerate_samples = trained.fit.degenerate_samples;
    report.folds.push_back(info);

    for (double ratio : cfg.ratios) {
      const double vr = cfg.validation_ratio.value_or(ratio);
      const auto val_outliers = prefix(val_out_s, data::outlier_count(split.validation.size(), vr));
      const auto test_outliers = prefix(test_out_s, data::outlier_count(split.test.size(), ratio));
      for (auto mode : modes) {
        const double gamma = select_threshold(labeled_scores(val_in_s, val_outliers, mode));
        ProtocolEntry e;
        e.fold = fold;
        e.ratio = ratio;
        e.mode = mode;
        e.metrics = compute_metrics(labeled_scores(test_in_s, test_outliers, mode), gamma);
        report.entries.push_back(e);
      }
    }
  }
  report.summary = summarize(report.entries);
  return report;
}

std::vector<MetricSummary> summarize(const std::vector<ProtocolEntry>& entries) {
  using Key = std::pair<double, detector::ScoringMode>;
  std::vector<Key> order;
  std::map<Key, std::vector<const MetricsReport*>> groups;
  for (const auto& e : entries) {
    const Key k{e.ratio, e.mode};
    auto& g = groups[k];
    if (g.empty()) order.push_back(k);
    g.push_back(&e.metrics);
  }
  std::vector<MetricSummary> out;
  for (const auto& k : order) {
    const auto& g = groups[k];
    MetricSummary s;
    s.ratio = k.first;
    s.mode = k.second;
    s.folds = g.size();
    const double n = static_cast<double>(g.size());
    auto stat = [&](auto field, double& mean, double& sd) {
      double sum = 0.0;
      for (const auto* r : g) sum += r->*field;
      mean = sum / n;
      double ss = 0.0;
      for (const auto* r : g) ss += (r->*field - mean) * (r->*field - mean);
      sd = g.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    };
    stat(&MetricsReport::f1, s.mean.f1, s.stddev.f1);
    stat(&MetricsReport::auroc, s.mean.auroc, s.stddev.auroc);
    stat(&MetricsReport::fpr_at_95tpr, s.mean.fpr_at_95tpr, s.stddev.fpr_at_95tpr);
    stat(&MetricsReport::detection_error, s.mean.detection_error, s.stddev.detection_error);
    stat(&MetricsReport::aupr_in, s.mean.aupr_in, s.stddev.aupr_in);
    stat(&MetricsReport::aupr_out, s.mean.aupr_out, s.stddev.aupr_out);
    stat(&MetricsReport::threshold, s.mean.threshold, s.stddev.threshold);
    std::size_t in = 0, outl = 0;
    for (const auto* r : g) {
      in += r->inliers;
      outl += r->outliers;
    }
    s.mean.inliers = in / g.size();
    s.mean.outliers = outl / g.size();
    out.push_back(s);
  }
  return out;
}

namespace {

nlohmann::ordered_json metrics_json(const MetricsReport& m, bool counts) {
  nlohmann::ordered_json j;
  j["f1"] = m.f1;
  j["auroc"] = m.auroc;
  j["fpr_at_95tpr"] = m.fpr_at_95tpr;
  j["detection_error"] = m.detection_error;
  j["aupr_in"] = m.aupr_in;
  j["aupr_out"] = m.aupr_out;
  j["threshold"] = m.threshold;
  if (counts) {
    j["inliers"] = m.inliers;
    j["outliers"] = m.outliers;
  }
  return j;
}

}  // namespace

std::string to_json(const ProtocolReport& report, const config::RunConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["inlier_class"] = report.inlier_class;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  {
    const std::string text = config::format(cfg);
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      const std::string line = text.substr(pos, nl - pos);
      const auto eq = line.find(" = ");
      c[line.substr(0, eq)] = line.substr(eq + 3);
      pos = nl + 1;
    }
  }
  doc["config"] = c;
  doc["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) {
    nlohmann::ordered_json j;
    j["fold"] = f.fold;
    j["train"] = f.train;
    j["validation"] = f.validation;
    j["test"] = f.test;
    j["final_loss"] = {{"adv_dz", f.final_losses.adv_dz},
                       {"adv_dx", f.final_losses.adv_dx},
                       {"error", f.final_losses.error},
                       {"adv_dz_gen", f.final_losses.adv_dz_gen},
                       {"adv_dx_gen", f.final_losses.adv_dx_gen}};
    j["degenerate_samples"] = f.degenerate_samples;
    doc["folds"].push_back(j);
  }
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json j;
    j["fold"] = e.fold;
    j["ratio"] = e.ratio;
    j["mode"] = detector::to_string(e.mode);
    j["metrics"] = metrics_json(e.metrics, true);
    doc["entries"].push_back(j);
  }
  doc["summary"] = nlohmann::ordered_json::array();
  for (const auto& s : report.summary) {
    nlohmann::ordered_json j;
    j["ratio"] = s.ratio;
    j["mode"] = detector::to_string(s.mode);
    j["folds"] = s.folds;
    j["mean"] = metrics_json(s.mean, false);
    j["stddev"] = metrics_json(s.stddev, false);
    doc["summary"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

}  // namespace gpnd::eval
