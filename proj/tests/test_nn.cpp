#include <doctest.h>

#include <cmath>

#include "gpnd/errors.hpp"
#include "gpnd/nn.hpp"

using namespace gpnd;
using namespace gpnd::nn;

namespace {

DenseNetwork single(std::size_t in, std::size_t out, Activation a, std::vector<double> w, std::vector<double> b) {
  DenseLayer l{Matrix(out, in), std::move(b), a};
  l.weight.data = std::move(w);
  return DenseNetwork{{l}};
}

// sum(c .* forward(net, x)) summed over the batch.
double weighted_output(const DenseNetwork& net, const Matrix& x, const Matrix& c) {
  const Matrix y = forward(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) s += c.data[i] * y.data[i];
  return s;
}

}  // namespace

TEST_CASE("init_network shapes, determinism and seeds") {
  const std::vector<LayerSpec> spec{{2, 3, Activation::relu}};
  const auto a = init_network(spec, Seed{5});
  REQUIRE(a.layers.size() == 1);
  CHECK(a.layers[0].weight.rows == 3);
  CHECK(a.layers[0].weight.cols == 2);
  CHECK(a.layers[0].bias == std::vector<double>(3, 0.0));
  CHECK(init_network(spec, Seed{5}) == a);
  CHECK_FALSE(init_network(spec, Seed{6}) == a);
}

TEST_CASE("init_network bounds follow the activation") {
  const std::vector<LayerSpec> spec{{100, 50, Activation::relu}, {50, 40, Activation::sigmoid}};
  const auto net = init_network(spec, Seed{9});
  const double kaiming = std::sqrt(6.0 / 100.0), xavier = std::sqrt(6.0 / 90.0);
  double max0 = 0, max1 = 0;
  for (double w : net.layers[0].weight.data) max0 = std::max(max0, std::abs(w));
  for (double w : net.layers[1].weight.data) max1 = std::max(max1, std::abs(w));
  CHECK(max0 <= kaiming);
  CHECK(max0 > 0.95 * kaiming);
  CHECK(max1 <= xavier);
  CHECK(max1 > 0.95 * xavier);
}

TEST_CASE("init_network rejects bad specs") {
  CHECK_THROWS_AS(init_network(std::vector<LayerSpec>{}, Seed{}), std::invalid_argument);
  CHECK_THROWS_AS(init_network(std::vector<LayerSpec>{{0, 3, Activation::relu}}, Seed{}), std::invalid_argument);
  CHECK_THROWS_AS(init_network(std::vector<LayerSpec>{{2, 3, Activation::relu}, {4, 1, Activation::relu}}, Seed{}),
                  std::invalid_argument);
}

TEST_CASE("forward on hand-built layers") {
  const std::vector<double> x{1.0, 2.0};
  CHECK(forward(single(2, 2, Activation::identity, {1, 0, 0, 1}, {0, 0}), x).output == std::vector<double>{1, 2});
  CHECK(forward(single(2, 3, Activation::sigmoid, std::vector<double>(6, 0.0), {0, 0, 0}), x).output ==
        std::vector<double>{0.5, 0.5, 0.5});
  CHECK(forward(single(2, 2, Activation::relu, {1, 0, 0, 1}, {0, 0}), std::vector<double>{-1, 2}).output ==
        std::vector<double>{0, 2});
  CHECK(forward(single(2, 2, Activation::leaky_relu, {1, 0, 0, 1}, {0, 0}), std::vector<double>{-1, 2}).output ==
        std::vector<double>{-0.2, 2});
  CHECK(forward(single(1, 1, Activation::tanh, {1}, {0}), std::vector<double>{0.5}).output[0] ==
        doctest::Approx(std::tanh(0.5)));
}

TEST_CASE("forward rejects bad input") {
  const auto net = single(2, 1, Activation::identity, {1, 1}, {0});
  CHECK_THROWS_AS(forward(net, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, NAN}), std::invalid_argument);
}

TEST_CASE("chained forward equals manual composition") {
  const std::vector<LayerSpec> spec{{4, 6, Activation::tanh}, {6, 3, Activation::leaky_relu}};
  const auto net = init_network(spec, Seed{2});
  const std::vector<double> x{0.1, -0.4, 0.7, 0.2};
  const auto first = forward(DenseNetwork{{net.layers[0]}}, x).output;
  const auto second = forward(DenseNetwork{{net.layers[1]}}, first).output;
  CHECK(forward(net, x).output == second);
}

TEST_CASE("batched forward equals row-by-row forward bit for bit") {
  const std::vector<LayerSpec> spec{{20, 64, Activation::relu}, {64, 10, Activation::sigmoid}};
  const auto net = init_network(spec, Seed{3});
  Rng rng(Seed{4});
  Matrix x(37, 20);
  for (auto& v : x.data) v = rng.normal();
  const Matrix y = forward(net, x);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto yi = forward(net, x.row(i)).output;
    CHECK(std::equal(yi.begin(), yi.end(), y.row(i).begin()));
  }
}

TEST_CASE("backward of a linear layer is the outer product") {
  const auto net = single(3, 2, Activation::identity, {1, 2, 3, 4, 5, 6}, {0.5, -0.5});
  const std::vector<double> x{1.0, -2.0, 0.5}, c{3.0, -1.0};
  const auto fr = forward(net, x);
  std::vector<double> gx;
  const auto g = backward(net, fr.tape, c, &gx);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(g[0].weight(i, j) == c[i] * x[j]);
  CHECK(g[0].bias == c);
  // input gradient = W^T c
  CHECK(gx == std::vector<double>{1 * 3 - 4, 2 * 3 - 5, 3 * 3 - 6});
}

TEST_CASE("zero output gradient gives zero gradients") {
  const auto net = init_network(std::vector<LayerSpec>{{3, 5, Activation::relu}, {5, 2, Activation::sigmoid}}, Seed{1});
  const auto fr = forward(net, std::vector<double>{0.3, 0.1, -0.2});
  std::vector<double> gx;
  const auto g = backward(net, fr.tape, std::vector<double>{0.0, 0.0}, &gx);
  for (const auto& l : g) {
    for (double v : l.weight.data) CHECK(v == 0.0);
    for (double v : l.bias) CHECK(v == 0.0);
  }
  for (double v : gx) CHECK(v == 0.0);
}

TEST_CASE("backward rejects a mismatched tape") {
  const auto net = init_network(std::vector<LayerSpec>{{3, 5, Activation::relu}, {5, 2, Activation::sigmoid}}, Seed{1});
  const auto other = init_network(std::vector<LayerSpec>{{3, 2, Activation::relu}}, Seed{1});
  const auto fr = forward(other, std::vector<double>{0.3, 0.1, -0.2});
  CHECK_THROWS_AS(backward(net, fr.tape, std::vector<double>{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("gradients match central differences on random networks") {
  Rng rng(Seed{77});
  const Activation acts[] = {Activation::relu, Activation::leaky_relu, Activation::sigmoid, Activation::tanh,
                             Activation::identity};
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t depth = 1 + rng.below(4);
    std::vector<LayerSpec> spec;
    std::size_t in = 1 + rng.below(12);
    for (std::size_t k = 0; k < depth; ++k) {
      const std::size_t out = 1 + rng.below(32);
      spec.push_back({in, out, acts[rng.below(5)]});
      in = out;
    }
    auto net = init_network(spec, Seed{static_cast<std::uint64_t>(trial)});
    for (auto& l : net.layers)
      for (auto& b : l.bias) b = 0.1 * rng.normal();
    Matrix x(3, spec.front().in), c(3, spec.back().out);
    for (auto& v : x.data) v = rng.normal();
    for (auto& v : c.data) v = rng.normal();

    Tape tape;
    forward(net, x, &tape);
    const auto g = backward(net, tape, c);
    const double h = 1e-4;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      auto check_param = [&](double& p, double analytic) {
        const double saved = p;
        p = saved + h;
        const double hi = weighted_output(net, x, c);
        p = saved - h;
        const double lo = weighted_output(net, x, c);
        p = saved;
        const double numeric = (hi - lo) / (2 * h);
        const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
        ++checked;
      };
      for (std::size_t i = 0; i < net.layers[k].weight.data.size(); ++i)
        check_param(net.layers[k].weight.data[i], g[k].weight.data[i]);
      for (std::size_t i = 0; i < net.layers[k].bias.size(); ++i) check_param(net.layers[k].bias[i], g[k].bias[i]);
    }
  }
  CHECK(checked > 100);
  CHECK(worst < 1e-4);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  auto net = init_network(std::vector<LayerSpec>{{3, 2, Activation::tanh}}, Seed{1});
  const auto before = net;
  auto st = make_adam(net, 0.002);
  adam_step(st, net, zero_gradients(net));
  CHECK(net == before);
  CHECK(st.step_count == 1);
}

TEST_CASE("adam: first step moves each parameter by the learning rate") {
  auto net = single(1, 1, Activation::identity, {0.7}, {0.0});
  auto st = make_adam(net, 0.002);
  auto g = zero_gradients(net);
  g[0].weight.data[0] = 3.5;
  g[0].bias[0] = -0.01;
  adam_step(st, net, g);
  CHECK(net.layers[0].weight.data[0] == doctest::Approx(0.7 - 0.002).epsilon(1e-6));
  CHECK(net.layers[0].bias[0] == doctest::Approx(0.002).epsilon(1e-4));
}

TEST_CASE("adam: minimizes (w - 3)^2") {
  auto net = single(1, 1, Activation::identity, {0.0}, {0.0});
  auto st = make_adam(net, 0.1);
  for (int i = 0; i < 200; ++i) {
    auto g = zero_gradients(net);
    g[0].weight.data[0] = 2.0 * (net.layers[0].weight.data[0] - 3.0);
    adam_step(st, net, g);
  }
  CHECK(st.step_count == 200);
  CHECK(std::abs(net.layers[0].weight.data[0] - 3.0) < 0.1);
}

TEST_CASE("adam: non-finite gradients are rejected without side effects") {
  auto net = init_network(std::vector<LayerSpec>{{2, 2, Activation::tanh}}, Seed{1});
  auto st = make_adam(net, 0.01);
  auto g = zero_gradients(net);
  g[0].weight.data[0] = 1.0;
  adam_step(st, net, g);
  const auto net_before = net;
  const auto m_before = st.first_moment[0].weight.data;
  g[0].weight.data[1] = INFINITY;
  CHECK_THROWS_AS(adam_step(st, net, g), NumericError);
  CHECK(net == net_before);
  CHECK(st.step_count == 1);
  CHECK(st.first_moment[0].weight.data == m_before);
}
