#include "gpnd/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gpnd/errors.hpp"
#include "gpnd/kernels.hpp"

namespace gpnd::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(std::string_view s) {
  for (auto a : {Activation::relu, Activation::leaky_relu, Activation::sigmoid, Activation::tanh,
                 Activation::identity})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown activation: " + std::string(s));
}

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.data.size() + l.bias.size();
  return n;
}

std::vector<LayerSpec> DenseNetwork::specs() const {
  std::vector<LayerSpec> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back({l.in(), l.out(), l.activation});
  return out;
}

void validate(const DenseNetwork& net) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& l = net.layers[k];
    if (l.in() == 0 || l.out() == 0) throw std::invalid_argument("layer with zero dimension");
    if (l.bias.size() != l.out()) throw std::invalid_argument("bias length does not match layer output");
    if (k > 0 && net.layers[k - 1].out() != l.in())
      throw std::invalid_argument("layer dimensions do not chain at layer " + std::to_string(k));
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weight.data.begin(), l.weight.data.end(), finite) ||
        !std::all_of(l.bias.begin(), l.bias.end(), finite))
      throw std::invalid_argument("non-finite parameter in layer " + std::to_string(k));
  }
}

DenseNetwork init_network(std::span<const LayerSpec> spec, Seed seed) {
  if (spec.empty()) throw std::invalid_argument("init_network: empty layer spec");
  Rng rng(seed);
  DenseNetwork net;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto& s = spec[k];
    if (s.in == 0 || s.out == 0) throw std::invalid_argument("init_network: zero dimension");
    if (k > 0 && spec[k - 1].out != s.in) throw std::invalid_argument("init_network: dimensions do not chain");
    const bool rectifier = s.activation == Activation::relu || s.activation == Activation::leaky_relu;
    const double bound = rectifier ? std::sqrt(6.0 / static_cast<double>(s.in))
                                   : std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    DenseLayer layer{Matrix(s.out, s.in), std::vector<double>(s.out, 0.0), s.activation};
    for (auto& w : layer.weight.data) w = rng.uniform(-bound, bound);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

void apply_activation(Activation a, std::span<double> v) {
  switch (a) {
    case Activation::relu:
      for (auto& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::leaky_relu:
      for (auto& x : v) x = x > 0.0 ? x : kLeakySlope * x;
      break;
    case Activation::sigmoid:
      for (auto& x : v) {
        if (x >= 0.0) {
          x = 1.0 / (1.0 + std::exp(-x));
        } else {
          const double e = std::exp(x);
          x = e / (1.0 + e);
        }
      }
      break;
    case Activation::tanh:
      for (auto& x : v) x = std::tanh(x);
      break;
    case Activation::identity:
      break;
  }
}

// Derivative of the activation expressed through its output y.
inline double activation_slope(Activation a, double y) {
  switch (a) {
    case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return y > 0.0 ? 1.0 : kLeakySlope;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

Matrix forward(const DenseNetwork& net, const Matrix& x, Tape* tape) {
  if (net.layers.empty()) throw std::invalid_argument("forward: network has no layers");
  if (x.cols != net.in_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(x.cols) + " columns, network expects " +
                                std::to_string(net.in_dim()));
  if (!std::all_of(x.data.begin(), x.data.end(), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("forward: non-finite input");
  if (tape) {
    tape->activations.clear();
    tape->activations.reserve(net.layers.size() + 1);
    tape->activations.push_back(x);
  }
  Matrix cur = x;
  for (const auto& layer : net.layers) {
    Matrix next;
    kernels::matmul_nt(cur, layer.weight, next);
    for (std::size_t i = 0; i < next.rows; ++i) {
      auto row = next.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
      apply_activation(layer.activation, row);
    }
    if (tape) tape->activations.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

ForwardResult forward(const DenseNetwork& net, std::span<const double> x) {
  ForwardResult r;
  Matrix out = forward(net, Matrix::from_row(x), &r.tape);
  r.output = std::move(out.data);
  return r;
}

Gradients zero_gradients(const DenseNetwork& net) {
  Gradients g;
  g.reserve(net.layers.size());
  for (const auto& l : net.layers) g.push_back({Matrix(l.out(), l.in()), std::vector<double>(l.out(), 0.0)});
  return g;
}

Gradients backward(const DenseNetwork& net, const Tape& tape, const Matrix& output_gradient,
                   Matrix* input_gradient) {
  const std::size_t depth = net.layers.size();
  if (tape.activations.size() != depth + 1) throw std::invalid_argument("backward: tape does not match network");
  for (std::size_t k = 0; k < depth; ++k) {
    if (tape.activations[k].cols != net.layers[k].in() || tape.activations[k + 1].cols != net.layers[k].out())
      throw std::invalid_argument("backward: tape does not match network");
  }
  const Matrix& out = tape.activations.back();
  if (output_gradient.rows != out.rows || output_gradient.cols != out.cols)
    throw std::invalid_argument("backward: output gradient shape mismatch");

  Gradients grads(depth);
  Matrix delta = output_gradient;
  for (std::size_t k = depth; k-- > 0;) {
    const auto& layer = net.layers[k];
    const Matrix& y = tape.activations[k + 1];
    for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] *= activation_slope(layer.activation, y.data[i]);

    auto& g = grads[k];
    kernels::matmul_tn(delta, tape.activations[k], g.weight);
    g.bias.assign(layer.out(), 0.0);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      auto row = delta.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) g.bias[j] += row[j];
    }
    if (k > 0 || input_gradient) {
      Matrix prev;
      kernels::matmul_nn(delta, layer.weight, prev);
      if (k == 0) {
        *input_gradient = std::move(prev);
      } else {
        delta = std::move(prev);
      }
    }
  }
  return grads;
}

Gradients backward(const DenseNetwork& net, const Tape& tape, std::span<const double> output_gradient,
                   std::vector<double>* input_gradient) {
  Matrix in_grad;
  Gradients g = backward(net, tape, Matrix::from_row(output_gradient), input_gradient ? &in_grad : nullptr);
  if (input_gradient) *input_gradient = std::move(in_grad.data);
  return g;
}

void scale(Gradients& g, double factor) {
  for (auto& l : g) {
    for (auto& v : l.weight.data) v *= factor;
    for (auto& v : l.bias) v *= factor;
  }
}

void accumulate(Gradients& a, const Gradients& b) {
  if (a.size() != b.size()) throw std::invalid_argument("accumulate: gradient depth mismatch");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].weight.data.size() != b[k].weight.data.size() || a[k].bias.size() != b[k].bias.size())
      throw std::invalid_argument("accumulate: gradient shape mismatch");
    for (std::size_t i = 0; i < a[k].weight.data.size(); ++i) a[k].weight.data[i] += b[k].weight.data[i];
    for (std::size_t i = 0; i < a[k].bias.size(); ++i) a[k].bias[i] += b[k].bias[i];
  }
}

bool all_finite(const Gradients& g) {
  auto finite = [](double v) { return std::isfinite(v); };
  for (const auto& l : g)
    if (!std::all_of(l.weight.data.begin(), l.weight.data.end(), finite) ||
        !std::all_of(l.bias.begin(), l.bias.end(), finite))
      return false;
  return true;
}

AdamState make_adam(const DenseNetwork& net, double learning_rate) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  AdamState s;
  s.first_moment = zero_gradients(net);
  s.second_moment = zero_gradients(net);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(AdamState& state, DenseNetwork& net, const Gradients& grads) {
  if (grads.size() != net.layers.size() || state.first_moment.size() != net.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (grads[k].weight.data.size() != net.layers[k].weight.data.size() ||
        grads[k].bias.size() != net.layers[k].bias.size())
      throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (!all_finite(grads)) throw NumericError("adam_step: non-finite gradient");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1, b2 = state.beta2, lr = state.learning_rate, eps = state.epsilon;

  auto update = [&](std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  };
  for (std::size_t k = 0; k < grads.size(); ++k) {
    auto& layer = net.layers[k];
    update(layer.weight.data, grads[k].weight.data, state.first_moment[k].weight.data,
           state.second_moment[k].weight.data);
    update(layer.bias, grads[k].bias, state.first_moment[k].bias, state.second_moment[k].bias);
  }
}

}  // namespace gpnd::nn
