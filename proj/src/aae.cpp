#include "gpnd/aae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "gpnd/errors.hpp"

namespace gpnd::aae {

using nn::Activation;
using nn::LayerSpec;

AaeModel make_aae(const Architecture& a, Seed seed) {
  if (a.ambient == 0 || a.latent == 0 || a.hidden == 0 || a.disc_z_hidden == 0)
    throw std::invalid_argument("make_aae: zero dimension");
  if (a.latent >= a.ambient) throw std::invalid_argument("make_aae: latent dimension must be below ambient");
  const std::vector<LayerSpec> enc{{a.ambient, a.hidden, Activation::relu}, {a.hidden, a.latent, Activation::identity}};
  const std::vector<LayerSpec> dec{{a.latent, a.hidden, Activation::relu}, {a.hidden, a.ambient, Activation::sigmoid}};
  const std::vector<LayerSpec> dz{{a.latent, a.disc_z_hidden, Activation::leaky_relu},
                                  {a.disc_z_hidden, a.disc_z_hidden, Activation::leaky_relu},
                                  {a.disc_z_hidden, 1, Activation::sigmoid}};
  const std::vector<LayerSpec> dx{{a.ambient, a.hidden, Activation::leaky_relu}, {a.hidden, 1, Activation::sigmoid}};
  return AaeModel{nn::init_network(enc, derive(seed, SeedPurpose::init_encoder)),
                  nn::init_network(dec, derive(seed, SeedPurpose::init_decoder)),
                  nn::init_network(dz, derive(seed, SeedPurpose::init_disc_z)),
                  nn::init_network(dx, derive(seed, SeedPurpose::init_disc_x))};
}

void validate(const AaeModel& model) {
  nn::validate(model.encoder);
  nn::validate(model.decoder);
  nn::validate(model.disc_z);
  nn::validate(model.disc_x);
  const std::size_t m = model.ambient_dim(), n = model.latent_dim();
  if (model.decoder.in_dim() != n || model.decoder.out_dim() != m)
    throw std::invalid_argument("decoder dimensions do not match encoder");
  if (model.disc_z.in_dim() != n || model.disc_z.out_dim() != 1)
    throw std::invalid_argument("D_z must map the latent space to a scalar");
  if (model.disc_x.in_dim() != m || model.disc_x.out_dim() != 1)
    throw std::invalid_argument("D_x must map the ambient space to a scalar");
  if (n >= m) throw std::invalid_argument("latent dimension must be below ambient dimension");
}

std::vector<double> encode(const AaeModel& model, std::span<const double> x) {
  return nn::forward(model.encoder, x).output;
}
Matrix encode(const AaeModel& model, const Matrix& x) { return nn::forward(model.encoder, x); }
std::vector<double> decode(const AaeModel& model, std::span<const double> z) {
  return nn::forward(model.decoder, z).output;
}
Matrix decode(const AaeModel& model, const Matrix& z) { return nn::forward(model.decoder, z); }

namespace {

inline double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double mean_log(const Matrix& p) {
  double s = 0.0;
  for (double v : p.data) s += std::log(clamp_prob(v));
  return s / static_cast<double>(p.data.size());
}

double mean_log1m(const Matrix& p) {
  double s = 0.0;
  for (double v : p.data) s += std::log(1.0 - clamp_prob(v));
  return s / static_cast<double>(p.data.size());
}

void check_unit_interval(const Matrix& x) {
  for (double v : x.data)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("reconstruction target outside [0, 1]");
}

double bce(const Matrix& target, const Matrix& out) {
  double s = 0.0;
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    const double y = clamp_prob(out.data[i]);
    const double t = target.data[i];
    s -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
  }
  return s / static_cast<double>(target.data.size());
}

// Gradient of bce with respect to the decoder output.
Matrix bce_gradient(const Matrix& target, const Matrix& out, double weight) {
  Matrix g(out.rows, out.cols);
  const double scale = weight / static_cast<double>(out.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double y = clamp_prob(out.data[i]);
    const double t = target.data[i];
    g.data[i] = scale * (-t / y + (1.0 - t) / (1.0 - y));
  }
  return g;
}

// d/dp of -w * mean log p over `rows` rows starting at `first`.
void grad_neg_log(const Matrix& p, Matrix& g, std::size_t first, std::size_t rows, double w) {
  const double scale = w / static_cast<double>(rows);
  for (std::size_t i = first; i < first + rows; ++i) g.data[i] = -scale / clamp_prob(p.data[i]);
}

// d/dp of -w * mean log(1 - p).
void grad_neg_log1m(const Matrix& p, Matrix& g, std::size_t first, std::size_t rows, double w) {
  const double scale = w / static_cast<double>(rows);
  for (std::size_t i = first; i < first + rows; ++i) g.data[i] = scale / (1.0 - clamp_prob(p.data[i]));
}

Matrix sample_prior(Rng& rng, std::size_t rows, std::size_t n) {
  Matrix z(rows, n);
  for (auto& v : z.data) v = rng.normal();
  return z;
}

void check_finite(double v, const char* term, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "training diverged: " << term << " is " << v << " at epoch " << epoch << ", batch " << batch;
    throw NumericError(os.str());
  }
}

}  // namespace

AdversarialLoss loss_adv_dz(const AaeModel& model, const Matrix& batch_x, const Matrix& prior_samples) {
  const Matrix real = nn::forward(model.disc_z, prior_samples);
  const Matrix fake = nn::forward(model.disc_z, encode(model, batch_x));
  return {-mean_log(real) - mean_log1m(fake), -mean_log(fake)};
}

AdversarialLoss loss_adv_dx(const AaeModel& model, const Matrix& batch_x, const Matrix& prior_samples) {
  const Matrix real = nn::forward(model.disc_x, batch_x);
  const Matrix fake = nn::forward(model.disc_x, decode(model, prior_samples));
  return {-mean_log(real) - mean_log1m(fake), -mean_log(fake)};
}

double loss_reconstruction(const AaeModel& model, const Matrix& batch_x) {
  check_unit_interval(batch_x);
  return bce(batch_x, decode(model, encode(model, batch_x)));
}

void validate(const TrainingConfig& cfg) {
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  for (double w : {cfg.lambda_recon, cfg.disc_z_weight, cfg.disc_x_weight, cfg.decoder_adv_weight,
                   cfg.encoder_adv_weight})
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("loss weights must be finite and >= 0");
}

TrainingHistory train(AaeModel& model, const Matrix& inliers, const TrainingConfig& cfg,
                      const TrainObserver& observer) {
  validate(model);
  validate(cfg);
  if (inliers.rows == 0) throw std::invalid_argument("train: empty dataset");
  if (inliers.cols != model.ambient_dim()) throw std::invalid_argument("train: sample dimension mismatch");
  check_unit_interval(inliers);

  TrainingHistory history;
  if (cfg.epochs == 0) return history;

  Rng rng(derive(cfg.seed, SeedPurpose::training));
  auto opt_enc = nn::make_adam(model.encoder, cfg.learning_rate);
  auto opt_dec = nn::make_adam(model.decoder, cfg.learning_rate);
  auto opt_dz = nn::make_adam(model.disc_z, cfg.learning_rate);
  auto opt_dx = nn::make_adam(model.disc_x, cfg.learning_rate);
  const std::size_t n = model.latent_dim();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = permutation(inliers.rows, rng);
    EpochLosses acc;
    acc.epoch = epoch + 1;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < inliers.rows; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, inliers.rows - start);
      const Matrix x = gather_rows(inliers, std::span(order).subspan(start, b));
      const Matrix prior = sample_prior(rng, b, n);
      auto notify = [&](UpdateStage s) {
        if (observer) observer(StageEvent{s, model, x, prior, epoch + 1, batches});
      };

      // (1) D_x: tell real samples from decoded prior samples.
      {
        const Matrix fake = nn::forward(model.decoder, prior);
        nn::Tape tape;
        const Matrix p = nn::forward(model.disc_x, vstack(x, fake), &tape);
        const double loss = -mean_log(slice_rows(p, 0, b)) - mean_log1m(slice_rows(p, b, b));
        check_finite(loss, "L_adv-dx (D_x)", epoch + 1, batches);
        Matrix g(p.rows, 1);
        grad_neg_log(p, g, 0, b, cfg.disc_x_weight);
        grad_neg_log1m(p, g, b, b, cfg.disc_x_weight);
        nn::adam_step(opt_dx, model.disc_x, nn::backward(model.disc_x, tape, g));
        acc.adv_dx += loss;
      }
      notify(UpdateStage::disc_x);

      // (2) f: make decoded prior samples look real to D_x.
      {
        nn::Tape dec_tape, dx_tape;
        const Matrix fake = nn::forward(model.decoder, prior, &dec_tape);
        const Matrix p = nn::forward(model.disc_x, fake, &dx_tape);
        const double loss = -mean_log(p);
        check_finite(loss, "L_adv-dx (f)", epoch + 1, batches);
        Matrix g(b, 1);
        grad_neg_log(p, g, 0, b, cfg.decoder_adv_weight);
        Matrix dfake;
        nn::backward(model.disc_x, dx_tape, g, &dfake);
        nn::adam_step(opt_dec, model.decoder, nn::backward(model.decoder, dec_tape, dfake));
        acc.adv_dx_gen += loss;
      }
      notify(UpdateStage::decoder_adversarial);

      // (3) D_z: tell prior samples from encodings.
      {
        const Matrix z = nn::forward(model.encoder, x);
        nn::Tape tape;
        const Matrix p = nn::forward(model.disc_z, vstack(prior, z), &tape);
        const double loss = -mean_log(slice_rows(p, 0, b)) - mean_log1m(slice_rows(p, b, b));
        check_finite(loss, "L_adv-dz (D_z)", epoch + 1, batches);
        Matrix g(p.rows, 1);
        grad_neg_log(p, g, 0, b, cfg.disc_z_weight);
        grad_neg_log1m(p, g, b, b, cfg.disc_z_weight);
        nn::adam_step(opt_dz, model.disc_z, nn::backward(model.disc_z, tape, g));
        acc.adv_dz += loss;
      }
      notify(UpdateStage::disc_z);

      // (4) g and f: reconstruction plus fooling D_z.
      {
        nn::Tape enc_tape, dec_tape, dz_tape;
        const Matrix z = nn::forward(model.encoder, x, &enc_tape);
        const Matrix xr = nn::forward(model.decoder, z, &dec_tape);
        const Matrix p = nn::forward(model.disc_z, z, &dz_tape);
        const double err = bce(x, xr);
        const double adv = -mean_log(p);
        check_finite(err, "L_error", epoch + 1, batches);
        check_finite(adv, "L_adv-dz (g)", epoch + 1, batches);

        Matrix dz_dec;
        const nn::Gradients dec_grads =
            nn::backward(model.decoder, dec_tape, bce_gradient(x, xr, cfg.lambda_recon), &dz_dec);
        Matrix g(b, 1);
        grad_neg_log(p, g, 0, b, cfg.encoder_adv_weight);
        Matrix dz_adv;
        nn::backward(model.disc_z, dz_tape, g, &dz_adv);
        for (std::size_t i = 0; i < dz_dec.data.size(); ++i) dz_dec.data[i] += dz_adv.data[i];
        const nn::Gradients enc_grads = nn::backward(model.encoder, enc_tape, dz_dec);
        nn::adam_step(opt_enc, model.encoder, enc_grads);
        nn::adam_step(opt_dec, model.decoder, dec_grads);
        acc.error += err;
        acc.adv_dz_gen += adv;
      }
      notify(UpdateStage::autoencoder);
      ++batches;
    }

    const double inv = 1.0 / static_cast<double>(batches);
    acc.adv_dz *= inv;
    acc.adv_dx *= inv;
    acc.error *= inv;
    acc.adv_dz_gen *= inv;
    acc.adv_dx_gen *= inv;
    history.epochs.push_back(acc);
  }
  return history;
}

std::string format_history(const TrainingHistory& history) {
  std::string out = "epoch\tL_adv-dz\tL_adv-dx\tL_error\tL_adv-dz_gen\tL_adv-dx_gen\n";
  char buf[256];
  for (const auto& e : history.epochs) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n", e.epoch, e.adv_dz, e.adv_dx, e.error,
                  e.adv_dz_gen, e.adv_dx_gen);
    out += buf;
  }
  return out;
}

}  // namespace gpnd::aae
