#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gpnd/matrix.hpp"
#include "gpnd/nn.hpp"
#include "gpnd/rng.hpp"

namespace gpnd::aae {

/// Layer widths of the dense adversarial autoencoder.
struct Architecture {
  std::size_t ambient = 0;         // m
  std::size_t latent = 16;         // n
  std::size_t hidden = 256;        // encoder, decoder and D_x hidden width
  std::size_t disc_z_hidden = 64;  // D_z hidden width (two layers)
};

/// Encoder g (m -> n), decoder f (n -> m, sigmoid output) and the two
/// discriminators D_z (n -> 1) and D_x (m -> 1), both with sigmoid outputs.
struct AaeModel {
  nn::DenseNetwork encoder;
  nn::DenseNetwork decoder;
  nn::DenseNetwork disc_z;
  nn::DenseNetwork disc_x;

  std::size_t ambient_dim() const { return encoder.in_dim(); }
  std::size_t latent_dim() const { return encoder.out_dim(); }
  bool operator==(const AaeModel&) const = default;
};

AaeModel make_aae(const Architecture& arch, Seed seed);

/// Checks that the four networks agree on (m, n) and that n < m.
void validate(const AaeModel& model);

std::vector<double> encode(const AaeModel& model, std::span<const double> x);
Matrix encode(const AaeModel& model, const Matrix& x);
std::vector<double> decode(const AaeModel& model, std::span<const double> z);
Matrix decode(const AaeModel& model, const Matrix& z);

/// Discriminator outputs are clamped to [kProbClamp, 1 - kProbClamp] before
/// any logarithm.
inline constexpr double kProbClamp = 1e-7;

struct AdversarialLoss {
  double discriminator = 0.0;  // minimized by the discriminator
  double generator = 0.0;      // non-saturating -mean log D(fake)
};

/// discriminator = -mean log D_z(prior) - mean log(1 - D_z(g(x)));
/// generator = -mean log D_z(g(x)).
AdversarialLoss loss_adv_dz(const AaeModel& model, const Matrix& batch_x, const Matrix& prior_samples);

/// discriminator = -mean log D_x(x) - mean log(1 - D_x(f(prior)));
/// generator = -mean log D_x(f(prior)).
AdversarialLoss loss_adv_dx(const AaeModel& model, const Matrix& batch_x, const Matrix& prior_samples);

/// Mean per-component binary cross-entropy between x and f(g(x)).
/// Throws std::invalid_argument for inputs outside [0, 1].
double loss_reconstruction(const AaeModel& model, const Matrix& batch_x);

struct TrainingConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 128;
  double learning_rate = 0.002;
  double lambda_recon = 2.0;     // weight of L_error in the g/f update
  double disc_z_weight = 2.0;    // weight of L_adv-dz in the D_z update
  double disc_x_weight = 1.0;    // weight of L_adv-dx in the D_x update
  double decoder_adv_weight = 1.0;  // weight of L_adv-dx in the f update
  double encoder_adv_weight = 1.0;  // weight of L_adv-dz in the g/f update
  Seed seed{};
};

void validate(const TrainingConfig& cfg);

/// The four per-batch updates, in the order they run.
enum class UpdateStage { disc_x = 1, decoder_adversarial = 2, disc_z = 3, autoencoder = 4 };

/// Batch means of every loss term, averaged over the batches of one epoch.
struct EpochLosses {
  std::size_t epoch = 0;
  double adv_dz = 0.0;      // D_z loss, stage 3
  double adv_dx = 0.0;      // D_x loss, stage 1
  double error = 0.0;       // reconstruction BCE, stage 4
  double adv_dz_gen = 0.0;  // g's adversarial term, stage 4
  double adv_dx_gen = 0.0;  // f's adversarial term, stage 2
};

struct TrainingHistory {
  std::vector<EpochLosses> epochs;
};

/// Passed to the observer after each update stage.
struct StageEvent {
  UpdateStage stage;
  const AaeModel& model;  // freshly updated
  const Matrix& batch_x;
  const Matrix& prior;    // prior samples drawn for this batch
  std::size_t epoch;      // 1-based
  std::size_t batch;      // 0-based within the epoch
};

using TrainObserver = std::function<void(const StageEvent&)>;

/// Alternating adversarial training on the rows of `inliers` (values in
/// [0, 1]). Each batch draws fresh N(0, I) prior samples and then runs
/// D_x, f, D_z and finally (g, f) updates with one Adam state per network.
/// Throws NumericError if a loss becomes non-finite.
TrainingHistory train(AaeModel& model, const Matrix& inliers, const TrainingConfig& cfg,
                      const TrainObserver& observer = {});

/// Plain-text table: epoch, L_adv-dz, L_adv-dx, L_error, then the two
/// generator-side adversarial terms.
std::string format_history(const TrainingHistory& history);

}  // namespace gpnd::aae
