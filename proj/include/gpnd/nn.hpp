#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpnd/matrix.hpp"
#include "gpnd/rng.hpp"

namespace gpnd::nn {

enum class Activation : std::uint32_t { relu = 0, leaky_relu = 1, sigmoid = 2, tanh = 3, identity = 4 };

/// Negative-side slope of leaky_relu.
inline constexpr double kLeakySlope = 0.2;

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

struct LayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::identity;
  bool operator==(const LayerSpec&) const = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t in() const { return weight.cols; }
  std::size_t out() const { return weight.rows; }
  bool operator==(const DenseLayer&) const = default;
};

/// Chain of affine + activation layers.
struct DenseNetwork {
  std::vector<DenseLayer> layers;

  std::size_t in_dim() const { return layers.front().in(); }
  std::size_t out_dim() const { return layers.back().out(); }
  std::size_t parameter_count() const;
  std::vector<LayerSpec> specs() const;
  bool operator==(const DenseNetwork&) const = default;
};

/// Throws std::invalid_argument if layer shapes do not chain or parameters are
/// not finite.
void validate(const DenseNetwork& net);

/// Weights are drawn Kaiming-uniform, U(-sqrt(6/fan_in), sqrt(6/fan_in)), for
/// relu and leaky_relu layers and Xavier-uniform,
/// U(-sqrt(6/(fan_in+fan_out)), +...), for sigmoid, tanh and identity layers.
/// Biases start at zero. Uses one Rng stream in layer order, row-major.
DenseNetwork init_network(std::span<const LayerSpec> spec, Seed seed);

/// Post-activation values of every layer; activations[0] is the input batch.
struct Tape {
  std::vector<Matrix> activations;
};

/// Batched forward pass, one sample per row. Records the tape when given.
Matrix forward(const DenseNetwork& net, const Matrix& x, Tape* tape = nullptr);

struct ForwardResult {
  std::vector<double> output;
  Tape tape;
};

/// Single-sample forward pass.
ForwardResult forward(const DenseNetwork& net, std::span<const double> x);

struct LayerGradient {
  Matrix weight;
  std::vector<double> bias;
};

using Gradients = std::vector<LayerGradient>;

Gradients zero_gradients(const DenseNetwork& net);

/// Reverse-mode gradients of sum(output_gradient .* forward(x)) with respect to
/// every parameter; the batch rows are summed. When input_gradient is non-null
/// it receives d/dx (same shape as the input batch).
Gradients backward(const DenseNetwork& net, const Tape& tape, const Matrix& output_gradient,
                   Matrix* input_gradient = nullptr);

/// Single-sample convenience wrapper.
Gradients backward(const DenseNetwork& net, const Tape& tape, std::span<const double> output_gradient,
                   std::vector<double>* input_gradient = nullptr);

void scale(Gradients& g, double factor);
/// a += b
void accumulate(Gradients& a, const Gradients& b);
bool all_finite(const Gradients& g);

/// Adam with bias correction. Constants default to beta1=0.9, beta2=0.999,
/// epsilon=1e-8.
struct AdamState {
  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam(const DenseNetwork& net, double learning_rate);

/// One Adam update of net in place. Throws NumericError, leaving both net and
/// state untouched, if any gradient is non-finite.
void adam_step(AdamState& state, DenseNetwork& net, const Gradients& grads);

}  // namespace gpnd::nn
