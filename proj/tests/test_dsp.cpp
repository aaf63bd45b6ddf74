#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "rfsc/dsp.hpp"
#include "rfsc/errors.hpp"
#include "rfsc/fft.hpp"
#include "rfsc/iq.hpp"
#include "rfsc/rng.hpp"

using namespace rfsc;
using cplx = std::complex<double>;

namespace {

std::vector<cplx> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> x(n);
  for (auto& v : x) v = rng.normal_complex();
  return x;
}

IqRecording tone_recording(double freq_hz, double fs, std::size_t n, double amp = 1.0) {
  IqRecording rec;
  rec.sample_rate_hz = fs;
  rec.samples.resize(n);
  const double w = 2.0 * std::numbers::pi * freq_hz / fs;
  for (std::size_t k = 0; k < n; ++k)
    rec.samples[k] = amp * std::polar(1.0, w * static_cast<double>(k));
  return rec;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

double db(double mag) { return 20.0 * std::log10(mag); }

}  // namespace

TEST_CASE("window coefficient anchors") {
  const auto hann = window_coefficients(WindowKind::Hann, 8);
  REQUIRE(hann.size() == 8);
  CHECK(hann[0] == 0.0);
  CHECK(hann[4] == doctest::Approx(1.0));
  CHECK(hann[2] == doctest::Approx(0.5));

  const auto hamming = window_coefficients(WindowKind::Hamming, 8);
  CHECK(hamming[0] == doctest::Approx(0.08));
  CHECK(hamming[4] == doctest::Approx(1.0));

  const auto blackman = window_coefficients(WindowKind::Blackman, 8);
  CHECK(std::abs(blackman[0]) < 1e-12);
  CHECK(blackman[4] == doctest::Approx(1.0));

  CHECK_THROWS_AS(window_coefficients(WindowKind::Hann, 0), InvalidArgument);
}

TEST_CASE("windows are periodic, symmetric past the first sample") {
  for (const auto kind : {WindowKind::Hann, WindowKind::Hamming, WindowKind::Blackman}) {
    const auto w = window_coefficients(kind, 64);
    for (std::size_t k = 1; k < 64; ++k)
      CHECK(w[k] == doctest::Approx(w[64 - k]).epsilon(1e-12));
  }
}

TEST_CASE("window names round trip") {
  for (const auto kind : {WindowKind::Hann, WindowKind::Hamming, WindowKind::Blackman})
    CHECK(window_from_name(window_name(kind)) == kind);
  CHECK(window_name(WindowKind::Hann) == "hann");
  CHECK_THROWS_AS(window_from_name("kaiser"), InvalidArgument);
}

TEST_CASE("fft of an impulse is flat") {
  Fft fft(16);
  std::vector<cplx> x(16, 0.0);
  x[0] = 2.5;
  fft.forward(x);
  for (const auto& v : x) {
    CHECK(v.real() == doctest::Approx(2.5));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
}

TEST_CASE("fft of a pure tone is a single bin") {
  const std::size_t n = 64;
  Fft fft(n);
  std::vector<cplx> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = std::polar(1.0, 2.0 * std::numbers::pi * 5.0 * static_cast<double>(k) /
                               static_cast<double>(n));
  fft.forward(x);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == 5)
      CHECK(std::abs(x[v] - cplx(static_cast<double>(n), 0.0)) < 1e-9);
    else
      CHECK(std::abs(x[v]) < 1e-9);
  }
}

TEST_CASE("fft matches the quadratic-time transform") {
  for (const std::size_t n : {std::size_t{2}, std::size_t{4}, std::size_t{8},
                              std::size_t{256}, std::size_t{1024}}) {
    const auto x = random_signal(n, 100 + n);
    const auto ref = oracle::naive_dft(x);
    auto got = x;
    Fft(n).forward(got);
    CHECK(max_abs_diff(got, ref) < 1e-9 * std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("non-power-of-two lengths go through the chirp transform") {
  for (const std::size_t n : {std::size_t{3}, std::size_t{5}, std::size_t{12},
                              std::size_t{100}, std::size_t{1000}}) {
    const auto x = random_signal(n, 300 + n);
    const auto ref = oracle::naive_dft(x);
    auto got = x;
    Fft(n).forward(got);
    CHECK(max_abs_diff(got, ref) < 1e-9 * static_cast<double>(n));
  }
}

TEST_CASE("stft shape and frame segmentation") {
  const auto x = random_signal(1024, 1);
  const Stft s = stft(x, 2e6, 256, 128, WindowKind::Hann);
  CHECK(s.bins() == 256);
  CHECK(s.frames() == (1024 - 256) / 128 + 1);
  CHECK(s.bin_hz() == doctest::Approx(2e6 / 256.0));
  CHECK(s.values.size() == s.bins() * s.frames());

  // input of exactly one frame gives one frame regardless of hop
  const Stft one = stft(std::span<const cplx>(x.data(), 256), 2e6, 256, 128, WindowKind::Hann);
  CHECK(one.frames() == 1);
}

TEST_CASE("stft rejects bad geometry") {
  const auto x = random_signal(64, 2);
  CHECK_THROWS_AS(stft(std::span<const cplx>(x.data(), 16), 2e6, 32, 16, WindowKind::Hann),
                  EmptyInputError);
  CHECK_THROWS_AS(stft(x, 2e6, 32, 0, WindowKind::Hann), InvalidArgument);
  CHECK_THROWS_AS(stft(x, 2e6, 32, 33, WindowKind::Hann), InvalidArgument);
  const std::vector<double> wrong(16, 1.0);
  CHECK_THROWS_AS(stft(x, 2e6, 32, 16, std::span<const double>(wrong)), ShapeError);
}

TEST_CASE("stft of a tone peaks at the tone bin in every frame") {
  const double fs = 2e6;
  const std::size_t fft_len = 256;
  const double f0 = 10.0 * fs / static_cast<double>(fft_len);
  const auto rec = tone_recording(f0, fs, 1024);
  const Stft s = stft(rec.samples, fs, fft_len, 128, WindowKind::Hann);
  for (std::size_t m = 0; m < s.frames(); ++m) {
    std::size_t best = 0;
    for (std::size_t v = 1; v < s.bins(); ++v)
      if (std::abs(s.at(v, m)) > std::abs(s.at(best, m))) best = v;
    CHECK(best == 10);
  }
}

TEST_CASE("stft is linear and maps zero to zero") {
  const auto x = random_signal(700, 3);
  std::vector<cplx> doubled(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) doubled[k] = 2.0 * x[k];
  const Stft sx = stft(x, 1e6, 128, 64, WindowKind::Hamming);
  const Stft s2 = stft(doubled, 1e6, 128, 64, WindowKind::Hamming);
  for (std::size_t k = 0; k < sx.values.size(); ++k)
    CHECK(std::abs(s2.values[k] - 2.0 * sx.values[k]) < 1e-12 * std::abs(sx.values[k]) + 1e-15);

  const std::vector<cplx> zeros(512, 0.0);
  const Stft sz = stft(zeros, 1e6, 128, 64, WindowKind::Hann);
  for (const auto& v : sz.values) CHECK(v == cplx(0.0, 0.0));
}

TEST_CASE("stft frames match the quadratic-time transform of windowed slices") {
  const auto x = random_signal(900, 4);
  const std::size_t fft_len = 128, hop = 64;
  const auto w = window_coefficients(WindowKind::Blackman, fft_len);
  const Stft s = stft(x, 1e6, fft_len, hop, WindowKind::Blackman);
  for (std::size_t m = 0; m < s.frames(); ++m) {
    std::vector<cplx> frame(fft_len);
    for (std::size_t k = 0; k < fft_len; ++k) frame[k] = w[k] * x[m * hop + k];
    const auto ref = oracle::naive_dft(frame);
    for (std::size_t v = 0; v < fft_len; ++v) CHECK(std::abs(s.at(v, m) - ref[v]) < 1e-9);
  }
}

TEST_CASE("stft with a unit window preserves frame energy") {
  const std::size_t fft_len = 256;
  const auto x = random_signal(fft_len * 3, 5);
  const std::vector<double> ones(fft_len, 1.0);
  const Stft s = stft(x, 1e6, fft_len, fft_len, std::span<const double>(ones));
  REQUIRE(s.frames() == 3);
  for (std::size_t m = 0; m < 3; ++m) {
    double time_energy = 0.0, freq_energy = 0.0;
    for (std::size_t k = 0; k < fft_len; ++k) time_energy += std::norm(x[m * fft_len + k]);
    for (std::size_t v = 0; v < fft_len; ++v) freq_energy += std::norm(s.at(v, m));
    CHECK(freq_energy == doctest::Approx(static_cast<double>(fft_len) * time_energy)
                             .epsilon(1e-10));
  }
}

TEST_CASE("mean profile equals the naive per-bin average") {
  Rng rng(6);
  Stft s;
  s.fft_len = 4;
  s.hop = 4;
  s.frame_count = 3;
  s.sample_rate_hz = 8.0;
  s.values.resize(12);
  for (auto& v : s.values) v = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
  const Mfp mine = mean_frequency_profile(s);
  const auto ref = oracle::naive_mfp(s);
  REQUIRE(mine.values.size() == 4);
  CHECK(mine.bin_hz == doctest::Approx(2.0));
  for (std::size_t v = 0; v < 4; ++v)
    CHECK(std::abs(mine.values[v] - ref[v]) < 1e-12);
}

TEST_CASE("mean profile of identical frames is the single-frame magnitude") {
  const auto frame = random_signal(16, 7);
  Stft s;
  s.fft_len = 16;
  s.hop = 16;
  s.frame_count = 5;
  s.sample_rate_hz = 16.0;
  for (std::size_t m = 0; m < 5; ++m)
    s.values.insert(s.values.end(), frame.begin(), frame.end());
  const Mfp mfp = mean_frequency_profile(s);
  for (std::size_t v = 0; v < 16; ++v)
    CHECK(mfp.values[v] == doctest::Approx(std::abs(frame[v])).epsilon(1e-12));
}

TEST_CASE("mean profile is invariant to frame order") {
  Stft a;
  a.fft_len = 8;
  a.hop = 8;
  a.frame_count = 4;
  a.sample_rate_hz = 8.0;
  a.values = random_signal(32, 8);
  Stft b = a;
  // swap frames 0 and 3
  for (std::size_t v = 0; v < 8; ++v) std::swap(b.values[v], b.values[v + 24]);
  const auto ma = mean_frequency_profile(a).values;
  const auto mb = mean_frequency_profile(b).values;
  for (std::size_t v = 0; v < 8; ++v) CHECK(ma[v] == doctest::Approx(mb[v]).epsilon(1e-15));
}

TEST_CASE("mean profile rejects an empty spectrogram") {
  Stft s;
  s.fft_len = 8;
  CHECK_THROWS_AS(mean_frequency_profile(s), EmptyInputError);
}

TEST_CASE("welch spectrum of white noise is flat") {
  IqRecording rec;
  rec.sample_rate_hz = 1e6;
  Rng rng(9);
  rec.samples.resize(256 * 110);
  for (auto& s : rec.samples) s = rng.normal_complex();
  const auto psd = welch_psd(rec, 256, WindowKind::Hann);
  REQUIRE(psd.size() == 256);
  double mean = 0.0;
  for (const double p : psd) mean += p;
  mean /= 256.0;
  double var = 0.0;
  for (const double p : psd) var += (p - mean) * (p - mean);
  const double rel_std = std::sqrt(var / 256.0) / mean;
  CHECK(rel_std < 0.2);
  // unit-variance noise: integrated density recovers total power
  CHECK(mean * 1e6 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("welch spectrum peaks at the tone bin") {
  const double fs = 1e6;
  const std::size_t fft_len = 512;
  const double f0 = 40.0 * fs / static_cast<double>(fft_len);
  const auto rec = tone_recording(f0, fs, 8192);
  const auto psd = welch_psd(rec, fft_len, WindowKind::Hann);
  const auto best = std::max_element(psd.begin(), psd.end()) - psd.begin();
  CHECK(best == 40);
}

TEST_CASE("filter design hits the Butterworth anchor points") {
  const SosFilter filt = design_butterworth_bandpass({10e3, 500e3, 5}, 2e6);
  CHECK(filt.sections.size() == 5);
  CHECK(filt.stable());

  CHECK(std::abs(db(sos_magnitude(filt, 10e3, 2e6)) - (-3.0103)) < 0.1);
  CHECK(std::abs(db(sos_magnitude(filt, 500e3, 2e6)) - (-3.0103)) < 0.1);
  // geometric band center sits at unity gain
  const double center = std::sqrt(10e3 * 500e3);
  CHECK(std::abs(db(sos_magnitude(filt, center, 2e6))) < 0.05);
  CHECK(sos_magnitude(filt, 1e3, 2e6) < 0.01);
  CHECK(sos_magnitude(filt, 1e6, 2e6) < 0.01);
  // monotone rolloff into the stopbands
  CHECK(sos_magnitude(filt, 5e3, 2e6) > sos_magnitude(filt, 2e3, 2e6));
  CHECK(sos_magnitude(filt, 600e3, 2e6) > sos_magnitude(filt, 800e3, 2e6));
}

TEST_CASE("filter design validates its spec") {
  CHECK_THROWS_AS(design_butterworth_bandpass({10e3, 1.2e6, 5}, 2e6), InvalidArgument);
  CHECK_THROWS_AS(design_butterworth_bandpass({500e3, 10e3, 5}, 2e6), InvalidArgument);
  CHECK_THROWS_AS(design_butterworth_bandpass({10e3, 500e3, 0}, 2e6), InvalidArgument);
  CHECK_THROWS_AS(design_butterworth_bandpass({10e3, 500e3, 5}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(design_butterworth_bandpass({0.0, 500e3, 5}, 2e6), InvalidArgument);
}

TEST_CASE("filter impulse response decays to numerical silence") {
  const SosFilter filt = design_butterworth_bandpass({10e3, 500e3, 5}, 2e6);
  IqRecording impulse;
  impulse.sample_rate_hz = 2e6;
  impulse.samples.assign(1000000, {0.0, 0.0});
  impulse.samples[0] = {1.0, 0.0};
  const IqRecording h = apply_filter(impulse, filt);
  double tail_energy = 0.0;
  double tail_peak = 0.0;
  for (std::size_t k = 900000; k < 1000000; ++k) {
    tail_energy += std::norm(h.samples[k]);
    tail_peak = std::max(tail_peak, std::abs(h.samples[k]));
  }
  CHECK(tail_energy < 1e-12);
  CHECK(tail_peak < 1e-12);
}

TEST_CASE("filter passes the band center and rejects out-of-band tones") {
  const SosFilter filt = design_butterworth_bandpass({10e3, 500e3, 5}, 2e6);
  const double fs = 2e6;
  const std::size_t n = 200000;  // 0.1 s, far beyond the ~1k-sample transient

  const IqRecording pass = apply_filter(tone_recording(std::sqrt(10e3 * 500e3), fs, n), filt);
  double acc = 0.0;
  for (std::size_t k = n / 100; k < n; ++k) acc += std::abs(pass.samples[k]);
  const double mean_amp = acc / static_cast<double>(n - n / 100);
  CHECK(mean_amp == doctest::Approx(1.0).epsilon(0.01));

  const IqRecording stop = apply_filter(tone_recording(1e3, fs, n / 4), filt);
  double worst = 0.0;
  for (std::size_t k = n / 8; k < n / 4; ++k) worst = std::max(worst, std::abs(stop.samples[k]));
  CHECK(worst < 0.01);

  IqRecording zeros;
  zeros.sample_rate_hz = fs;
  zeros.samples.assign(4096, {0.0, 0.0});
  const IqRecording out = apply_filter(zeros, filt);
  for (const auto& v : out.samples) CHECK(v == cplx(0.0, 0.0));
}
