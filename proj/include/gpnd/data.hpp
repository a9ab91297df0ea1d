#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gpnd/matrix.hpp"
#include "gpnd/metrics.hpp"
#include "gpnd/rng.hpp"

namespace gpnd::data {

/// Samples in [0, 1]^m, one per row, with integer class labels.
struct Dataset {
  Matrix samples;
  std::vector<int> labels;

  std::size_t size() const { return samples.rows; }
  std::size_t dim() const { return samples.cols; }
  bool operator==(const Dataset&) const = default;
};

/// Throws DataError unless every value is in [0, 1], labels are
/// non-negative and counts agree.
void validate(const Dataset& d);

Dataset subset(const Dataset& d, std::span<const std::size_t> idx);
/// Indices of the samples with (or without) the given label.
std::vector<std::size_t> indices_with_label(const Dataset& d, int label);
std::vector<std::size_t> indices_without_label(const Dataset& d, int label);
Dataset concat(const Dataset& a, const Dataset& b);

/// Big-endian IDX image (magic 0x00000803) and label (0x00000801) files.
/// Files ending in ".gz" are decompressed on the fly. Pixels are scaled by
/// 1/255 and each image is flattened row-major.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Loads train + test from a directory laid out like the MNIST distribution
/// (train-images-idx3-ubyte[.gz], ..., t10k-labels-idx1-ubyte[.gz]).
Dataset load_idx_directory(const std::filesystem::path& dir);

enum class GeneratorKind : std::uint32_t { tanh_network = 0, linear = 1 };

/// x = squash(f_gen(z)) + noise, z ~ N(0, I_n), clipped to [0, 1].
/// tanh_network: h = tanh(W1 z + b1), y = W2 h with unit-norm rows of W2,
///   squash(y) = 0.5 + 0.25 y.
/// linear: x = 0.5 + A z; A is `linear_map` when given, otherwise a seeded
///   m x n matrix with orthonormal columns scaled by `linear_scale`.
struct SyntheticManifoldConfig {
  std::size_t latent_dim = 2;     // n
  std::size_t ambient_dim = 64;   // m
  std::size_t hidden_dim = 32;    // tanh_network only
  GeneratorKind generator = GeneratorKind::tanh_network;
  Matrix linear_map;              // optional explicit A (m x n)
  double linear_scale = 0.1;
  double noise_sigma = 0.02;
  std::size_t count = 1000;       // samples per class
  std::size_t classes = 1;        // each class gets its own generator
  Seed seed{};

  bool operator==(const SyntheticManifoldConfig&) const = default;
};

void validate(const SyntheticManifoldConfig& cfg);

/// Generator parameters; one per class.
struct Generator {
  GeneratorKind kind = GeneratorKind::tanh_network;
  Matrix w1;                // hidden x n (tanh) or A, m x n (linear)
  std::vector<double> b1;   // hidden
  Matrix w2;                // m x hidden
  std::vector<double> offset;  // m

  /// Noise-free point on the manifold (before clipping).
  std::vector<double> operator()(std::span<const double> z) const;
};

struct SyntheticData {
  Dataset data;
  Matrix latents;                 // ground-truth z, N x n
  std::vector<Generator> generators;
  std::size_t clipped_values = 0;
  std::string generator_spec;     // key=value description stored in files
};

SyntheticData generate_synthetic(const SyntheticManifoldConfig& cfg);

/// "GPDS" dataset file: magic, u32 version, u32 N, u32 m, u32 n, f64
/// samples, f64 latents, u32 labels, u32 spec length, spec bytes.
std::vector<std::uint8_t> serialize_synthetic(const SyntheticData& d);
SyntheticData deserialize_synthetic(std::span<const std::uint8_t> bytes);
void save_synthetic(const SyntheticData& d, const std::filesystem::path& path);
SyntheticData load_synthetic(const std::filesystem::path& path);

/// Dataset from a ".gpds" file, an MNIST-style directory, or
/// "images,labels" IDX paths.
Dataset load_any(const std::string& spec);

struct Split {
  Dataset train, validation, test;
};

/// Seeded shuffle then contiguous partition with sizes round(N f0),
/// round(N f1) and the remainder.
Split split(const Dataset& d, std::span<const double> fractions, Seed seed);

/// round(inliers * ratio / (1 - ratio)) outliers so that `ratio` is the
/// outlier fraction of the combined set.
std::size_t outlier_count(std::size_t inliers, double ratio);

/// Draws `count` entries of `pool` uniformly without replacement (a prefix of
/// a seeded Fisher-Yates shuffle, so equal seeds give nested draws). Draws
/// cycle through fresh shuffles when count exceeds the pool.
std::vector<std::size_t> sample_without_replacement(std::span<const std::size_t> pool, std::size_t count, Seed seed);

struct LabeledSet {
  Dataset data;                      // inliers first, then outliers
  std::vector<eval::Label> labels;
  std::vector<std::size_t> outlier_source;  // corpus index of each outlier
};

/// Appends outlier_count(|inliers|, ratio) samples of `corpus` whose label is
/// not `inlier_class`.
LabeledSet inject_outliers(const Dataset& inliers, const Dataset& corpus, int inlier_class, double ratio, Seed seed);

}  // namespace gpnd::data
