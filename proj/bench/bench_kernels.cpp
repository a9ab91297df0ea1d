#include <benchmark/benchmark.h>

#include "gpnd/aae.hpp"
#include "gpnd/detector.hpp"
#include "gpnd/kernels.hpp"

using namespace gpnd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(Seed{seed});
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform();
  return m;
}

// Forward pass shape of the first encoder layer: batch x 784 times 256 x 784.
template <void (*Kernel)(const Matrix&, const Matrix&, Matrix&)>
void BM_matmul_nt(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(batch, 784, 1), b = random_matrix(256, 784, 2);
  Matrix c(batch, 256);
  for (auto _ : state) {
    Kernel(a, b, c);
    benchmark::DoNotOptimize(c.data.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch * 784 * 256));
}

template <void (*Kernel)(const Matrix&, const Matrix&, Matrix&)>
void BM_matmul_tn(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(batch, 256, 1), b = random_matrix(batch, 784, 2);
  Matrix c(256, 784);
  for (auto _ : state) {
    Kernel(a, b, c);
    benchmark::DoNotOptimize(c.data.data());
  }
}

detector::DetectorModel mnist_sized_model() {
  detector::DetectorModel m;
  m.aae = aae::make_aae(aae::Architecture{784, 16, 256, 64}, Seed{3});
  const auto fit = detector::fit_densities(m.aae, random_matrix(200, 784, 4));
  m.latent_density = fit.latent;
  m.residual_hist = fit.hist;
  return m;
}

void BM_score_serial(benchmark::State& state) {
  const auto model = mnist_sized_model();
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 784, 5);
  for (auto _ : state) benchmark::DoNotOptimize(detector::score_batch_serial(model, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_score_parallel(benchmark::State& state) {
  const auto model = mnist_sized_model();
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 784, 5);
  for (auto _ : state) benchmark::DoNotOptimize(detector::score_batch(model, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_matmul_nt<kernels::reference::matmul_nt>)->Name("matmul_nt/reference")->Arg(32)->Arg(128);
BENCHMARK(BM_matmul_nt<kernels::matmul_nt>)->Name("matmul_nt/openmp")->Arg(32)->Arg(128);
BENCHMARK(BM_matmul_tn<kernels::reference::matmul_tn>)->Name("matmul_tn/reference")->Arg(128);
BENCHMARK(BM_matmul_tn<kernels::matmul_tn>)->Name("matmul_tn/openmp")->Arg(128);
BENCHMARK(BM_score_serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_score_parallel)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
