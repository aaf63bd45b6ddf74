#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "rfsc/classify.hpp"
#include "rfsc/dsp.hpp"
#include "rfsc/features.hpp"
#include "rfsc/fft.hpp"
#include "rfsc/math.hpp"
#include "rfsc/rng.hpp"
#include "rfsc/simulate.hpp"

namespace {

std::vector<std::complex<double>> random_signal(std::size_t n, std::uint64_t seed) {
  rfsc::Rng rng(seed);
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = rng.normal_complex();
  return x;
}

void bm_fft(benchmark::State& state) {
  auto x = random_signal(static_cast<std::size_t>(state.range(0)), 1);
  const rfsc::Fft plan(x.size());
  auto scratch = x;
  for (auto _ : state) {
    scratch = x;
    plan.forward(scratch);
    benchmark::DoNotOptimize(scratch.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_fft)->Arg(4096)->Arg(16384)->Arg(5000);  // 5000 exercises the non-pow2 path

void bm_filter(benchmark::State& state) {
  rfsc::IqRecording rec;
  rec.sample_rate_hz = 2e6;
  rec.samples = random_signal(100000, 2);
  const auto filter = rfsc::design_butterworth_bandpass({10e3, 500e3, 5}, 2e6);
  for (auto _ : state) {
    auto out = rfsc::apply_filter(rec, filter);
    benchmark::DoNotOptimize(out.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * rec.samples.size());
}
BENCHMARK(bm_filter);

void bm_stft(benchmark::State& state) {
  const auto x = random_signal(100000, 3);
  const auto fft_len = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto grid = rfsc::stft(x, 2e6, fft_len, fft_len / 2, rfsc::WindowKind::Hann);
    benchmark::DoNotOptimize(grid.values.data());
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(bm_stft)->Arg(4096)->Arg(16384);

void bm_profile(benchmark::State& state) {
  const auto x = random_signal(100000, 4);
  const auto grid = rfsc::stft(x, 2e6, 16384, 8192, rfsc::WindowKind::Hann);
  for (auto _ : state) {
    auto profile = rfsc::mean_frequency_profile(grid);
    benchmark::DoNotOptimize(profile.values.data());
  }
}
BENCHMARK(bm_profile);

void bm_pca_fit(benchmark::State& state) {
  rfsc::Rng rng(5);
  rfsc::Matrix x(200, 64);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  for (auto _ : state) {
    auto model = rfsc::pca_fit(x, rfsc::PcaTarget::variance(0.99, 14));
    benchmark::DoNotOptimize(model.components.data());
  }
}
BENCHMARK(bm_pca_fit);

void bm_svm_train(benchmark::State& state) {
  rfsc::Rng rng(6);
  const std::size_t per_class = 60, dims = 8;
  rfsc::Matrix x(3 * per_class, dims);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto cls = i / per_class;
    labels.push_back(std::string(1, static_cast<char>('a' + cls)));
    for (std::size_t j = 0; j < dims; ++j)
      x(i, j) = rng.normal() + (j == cls ? 3.0 : 0.0);
  }
  rfsc::SvmParams params;
  for (auto _ : state) {
    auto model = rfsc::svm_train(x, labels, params);
    benchmark::DoNotOptimize(model.machines.data());
  }
}
BENCHMARK(bm_svm_train);

void bm_simulate(benchmark::State& state) {
  const auto spec = rfsc::MovementSpec::from_label("XYZ", 25.0, 5.0);
  const auto model = rfsc::EmissionModel::defaults();
  for (auto _ : state) {
    auto rec = rfsc::synth_movement(spec, model, 2e6, 0.05, 7);
    benchmark::DoNotOptimize(rec.samples.data());
  }
}
BENCHMARK(bm_simulate);

}  // namespace

BENCHMARK_MAIN();
