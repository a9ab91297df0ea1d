#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include "gpnd/binary_io.hpp"
#include "gpnd/config.hpp"
#include "gpnd/data.hpp"
#include "gpnd/detector.hpp"
#include "gpnd/errors.hpp"
#include "gpnd/kernels.hpp"
#include "gpnd/protocol.hpp"

namespace gpnd::cli {

namespace {

struct Options {
  std::string config_path;
  std::string data;
  int inlier_class = -1;
  std::string model;
  std::string out;
  std::string mode;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

config::RunConfig resolve_config(const Options& o) {
  config::RunConfig cfg = o.config_path.empty() ? config::RunConfig{} : config::load(o.config_path);
  if (o.seed) config::set(cfg, "seed", std::to_string(*o.seed));
  if (!o.mode.empty()) {
    config::set(cfg, "scoring_mode", o.mode);
    cfg.ablation = false;
  }
  config::validate(cfg);
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_generate(const Options& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  cfg.synthetic.seed = cfg.seed;
  const auto synth = data::generate_synthetic(cfg.synthetic);
  const auto bytes = data::serialize_synthetic(synth);

  std::ostringstream manifest;
  manifest << "# gpnd synthetic dataset\n"
           << "file = " << std::filesystem::path(o.out).filename().string() << '\n'
           << "samples = " << synth.data.size() << '\n'
           << "ambient_dim = " << synth.data.dim() << '\n'
           << "latent_dim = " << synth.latents.cols << '\n'
           << "clipped_values = " << synth.clipped_values << '\n'
           << "fnv1a64 = " << std::hex << io::fnv1a64(bytes) << std::dec << '\n'
           << "generator = " << synth.generator_spec << '\n';
  io::write_file_atomic(o.out, bytes);
  io::write_file_atomic(o.out + ".manifest", manifest.str());
  out << "wrote " << synth.data.size() << " samples to " << o.out << " (" << synth.clipped_values
      << " clipped values)\n";
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  const auto corpus = data::load_any(o.data);
  data::validate(corpus);
  const auto split = eval::fold_split(corpus, o.inlier_class, 0, cfg.max_train, cfg.seed);
  const auto trained = eval::build_detector(gather_rows(corpus.samples, split.train), cfg, eval::fold_seed(cfg.seed, 0));
  out << aae::format_history(trained.history);

  auto model = trained.model;
  const double ratio = cfg.validation_ratio.value_or(cfg.ratios.front());
  const auto donors = data::sample_without_replacement(
      split.validation_donors, data::outlier_count(split.validation.size(), ratio),
      derive(cfg.seed, SeedPurpose::validation_outliers, 0));
  const auto in_s = detector::score_batch(model, gather_rows(corpus.samples, split.validation));
  const auto out_s = detector::score_batch(model, gather_rows(corpus.samples, donors));
  const auto set = eval::labeled_scores(in_s, out_s, model.scoring_mode);
  model.threshold = eval::select_threshold(set);
  detector::save_model(model, o.model);
  out << "# train " << split.train.size() << " validation " << split.validation.size() << "+" << donors.size()
      << " threshold " << fmt(*model.threshold) << " validation_f1 " << fmt(eval::f1(set, *model.threshold))
      << '\n';
  return kOk;
}

int cmd_score(const Options& o, std::ostream& out) {
  const auto model = detector::load_model(o.model);
  const auto input = data::load_any(o.data);
  if (input.dim() != model.ambient_dim())
    throw std::invalid_argument("input dimension " + std::to_string(input.dim()) + " does not match model dimension " +
                                std::to_string(model.ambient_dim()));
  const auto scores = detector::score_batch(model, input.samples);
  std::string text = "index\tlog_p_par\tlog_p_perp\tlog_p_x\tdecision\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    const char* decision = "-";
    if (model.threshold)
      decision = detector::classify(model, s) == detector::Decision::inlier ? "inlier" : "outlier";
    text += std::to_string(i) + '\t' + fmt(s.log_p_par) + '\t' + fmt(s.log_p_perp) + '\t' + fmt(s.log_p_x) + '\t' +
            decision + '\n';
  }
  io::write_file_atomic(o.out, text);
  out << "scored " << scores.size() << " samples\n";
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  const auto corpus = data::load_any(o.data);
  const auto report = eval::run_protocol(corpus, o.inlier_class, cfg, [&](const std::string& s) { out << s << '\n'; });
  io::write_file_atomic(o.out, eval::to_json(report, cfg));
  for (const auto& s : report.summary)
    out << "ratio " << s.ratio << " " << detector::to_string(s.mode) << " f1 " << s.mean.f1 << " auroc "
        << s.mean.auroc << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative probabilistic novelty detection"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "Worker thread cap")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("generate", "Write a synthetic manifold dataset and its manifest");
  auto* train = app.add_subcommand("train", "Train a detector on one class and pick its threshold");
  auto* score = app.add_subcommand("score", "Score every sample of a dataset");
  auto* ev = app.add_subcommand("eval", "Run the per-class evaluation protocol");
  for (auto* sc : {gen, train, ev}) {
    sc->add_option("--config", o.config_path, "key = value run configuration")->check(CLI::ExistingFile);
    sc->add_option("--seed", o.seed, "Top-level seed (overrides the config)");
  }
  for (auto* sc : {train, score, ev}) sc->add_option("--data", o.data, "Dataset: .gpds file, IDX directory or images,labels")->required();
  for (auto* sc : {train, ev}) {
    sc->add_option("--class", o.inlier_class, "Inlier class label")->required()->check(CLI::NonNegativeNumber);
    sc->add_option("--mode", o.mode, "Scoring mode (complete, parallel_only, perpendicular_only, pz_only)");
  }
  train->add_option("--model", o.model, "Model file to write")->required();
  score->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", o.out, "Dataset file to write")->required();
  score->add_option("--out", o.out, "Score table to write")->required();
  ev->add_option("--out", o.out, "JSON report to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (o.threads > 0) kernels::set_threads(o.threads);
    if (gen->parsed()) return cmd_generate(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (score->parsed()) return cmd_score(o, out);
    return cmd_eval(o, out);
  } catch (const config::ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace gpnd::cli
