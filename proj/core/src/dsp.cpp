#include "rfsc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rfsc/errors.hpp"
#include "rfsc/fft.hpp"

namespace rfsc {
namespace {

constexpr double kPi = std::numbers::pi;

struct PolePair {
  std::complex<double> p1, p2;
  double radius() const { return std::max(std::abs(p1), std::abs(p2)); }
};

}  // namespace

bool SosFilter::stable() const {
  for (const Sos& s : sections) {
    // Jury criterion for z^2 + a1 z + a2
    if (!(std::abs(s.a2) < 1.0 && std::abs(s.a1) < 1.0 + s.a2)) return false;
  }
  return true;
}

SosFilter design_butterworth_bandpass(const BandpassSpec& spec, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0))
    throw InvalidArgument("filter design: sample rate must be > 0");
  if (!(spec.low_cut_hz > 0.0 && spec.low_cut_hz < spec.high_cut_hz &&
        spec.high_cut_hz < sample_rate_hz / 2.0))
    throw InvalidArgument("filter design: need 0 < low < high < Nyquist");
  if (spec.order < 1 || spec.order > 16)
    throw InvalidArgument("filter design: order out of range [1, 16]");

  const int n = spec.order;
  const double fs2 = 2.0 * sample_rate_hz;

  // prewarped band edges so the bilinear transform lands the -3 dB
  // points exactly on the requested frequencies
  const double w1 = fs2 * std::tan(kPi * spec.low_cut_hz / sample_rate_hz);
  const double w2 = fs2 * std::tan(kPi * spec.high_cut_hz / sample_rate_hz);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  // low-pass prototype poles on the unit circle, then the band-pass
  // transform splits each into a pair
  std::vector<std::complex<double>> analog_poles;
  analog_poles.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double theta = kPi * (2.0 * k + n - 1.0) / (2.0 * n);
    const std::complex<double> proto = std::polar(1.0, theta);
    const std::complex<double> scaled = proto * (bw / 2.0);
    const std::complex<double> disc = std::sqrt(scaled * scaled - w0 * w0);
    analog_poles.push_back(scaled + disc);
    analog_poles.push_back(scaled - disc);
  }

  // bilinear map; the band-pass has n zeros at s=0 and n at infinity,
  // which land on z=+1 and z=-1 respectively
  std::vector<std::complex<double>> digital_poles;
  digital_poles.reserve(analog_poles.size());
  std::complex<double> denom = 1.0;
  for (const auto& p : analog_poles) {
    digital_poles.push_back((fs2 + p) / (fs2 - p));
    denom *= fs2 - p;
  }
  const double gain = std::pow(bw, n) * std::pow(fs2, n) / denom.real();

  // group into biquads: conjugate pairs stay together, the (at most two)
  // real poles from an odd prototype share a section
  std::vector<std::complex<double>> reals, uppers;
  for (const auto& p : digital_poles) {
    if (std::abs(p.imag()) <= 1e-9 * std::max(1.0, std::abs(p)))
      reals.push_back({p.real(), 0.0});
    else if (p.imag() > 0.0)
      uppers.push_back(p);
  }
  std::sort(reals.begin(), reals.end(),
            [](const auto& a, const auto& b) { return std::abs(a) < std::abs(b); });
  if (reals.size() % 2 != 0 || reals.size() / 2 + uppers.size() != static_cast<std::size_t>(n))
    throw Error("filter design: pole pairing failed");

  std::vector<PolePair> pairs;
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
    pairs.push_back({reals[i], reals[i + 1]});
  for (const auto& p : uppers) pairs.push_back({p, std::conj(p)});
  // cascade order: poles nearest the unit circle run last
  std::sort(pairs.begin(), pairs.end(),
            [](const PolePair& a, const PolePair& b) { return a.radius() < b.radius(); });

  SosFilter filter;
  filter.sections.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Sos s;
    // zeros z = +1 and z = -1 give (z-1)(z+1) = z^2 - 1
    const double g = i == 0 ? gain : 1.0;
    s.b0 = g;
    s.b1 = 0.0;
    s.b2 = -g;
    s.a1 = -(pairs[i].p1 + pairs[i].p2).real();
    s.a2 = (pairs[i].p1 * pairs[i].p2).real();
    filter.sections.push_back(s);
  }
  if (!filter.stable()) throw Error("filter design: produced an unstable section");
  return filter;
}

IqRecording apply_filter(const IqRecording& rec, const SosFilter& filter) {
  IqRecording out = rec;
  for (const Sos& s : filter.sections) {
    std::complex<double> w1 = 0.0, w2 = 0.0;
    for (auto& x : out.samples) {
      const std::complex<double> y = s.b0 * x + w1;
      w1 = s.b1 * x - s.a1 * y + w2;
      w2 = s.b2 * x - s.a2 * y;
      x = y;
    }
  }
  return out;
}

double sos_magnitude(const SosFilter& filter, double freq_hz, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sos_magnitude: sample rate must be > 0");
  const std::complex<double> zinv =
      std::polar(1.0, -2.0 * kPi * freq_hz / sample_rate_hz);
  const std::complex<double> zinv2 = zinv * zinv;
  double mag = 1.0;
  for (const Sos& s : filter.sections) {
    const std::complex<double> num = s.b0 + s.b1 * zinv + s.b2 * zinv2;
    const std::complex<double> den = 1.0 + s.a1 * zinv + s.a2 * zinv2;
    mag *= std::abs(num) / std::abs(den);
  }
  return mag;
}

std::string window_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::Hann: return "hann";
    case WindowKind::Hamming: return "hamming";
    case WindowKind::Blackman: return "blackman";
  }
  throw InvalidArgument("unknown window kind");
}

WindowKind window_from_name(const std::string& name) {
  if (name == "hann") return WindowKind::Hann;
  if (name == "hamming") return WindowKind::Hamming;
  if (name == "blackman") return WindowKind::Blackman;
  throw InvalidArgument("unknown window '" + name + "' (hann, hamming, blackman)");
}

std::vector<double> window_coefficients(WindowKind kind, std::size_t length) {
  if (length == 0) throw InvalidArgument("window: zero length");
  std::vector<double> w(length);
  const double step = 2.0 * kPi / static_cast<double>(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = step * static_cast<double>(i);
    switch (kind) {
      case WindowKind::Hann: w[i] = 0.5 - 0.5 * std::cos(t); break;
      case WindowKind::Hamming: w[i] = 0.54 - 0.46 * std::cos(t); break;
      case WindowKind::Blackman:
        w[i] = 0.42 - 0.5 * std::cos(t) + 0.08 * std::cos(2.0 * t);
        break;
    }
  }
  return w;
}

Stft stft(std::span<const std::complex<double>> samples, double sample_rate_hz,
          std::size_t fft_len, std::size_t hop, WindowKind window) {
  const auto w = window_coefficients(window, fft_len);
  return stft(samples, sample_rate_hz, fft_len, hop, std::span<const double>(w));
}

Stft stft(std::span<const std::complex<double>> samples, double sample_rate_hz,
          std::size_t fft_len, std::size_t hop, std::span<const double> window) {
  if (fft_len < 2) throw InvalidArgument("stft: fft length must be at least 2");
  if (hop == 0 || hop > fft_len)
    throw InvalidArgument("stft: hop must be in (0, fft_len]");
  if (window.size() != fft_len)
    throw ShapeError("stft: window length does not match fft length");
  if (samples.size() < fft_len)
    throw EmptyInputError("stft: input shorter than one frame");

  Stft out;
  out.fft_len = fft_len;
  out.hop = hop;
  out.sample_rate_hz = sample_rate_hz;
  out.frame_count = (samples.size() - fft_len) / hop + 1;
  out.values.resize(fft_len * out.frame_count);

  const Fft plan(fft_len);
  std::vector<std::complex<double>> frame(fft_len);
  for (std::size_t m = 0; m < out.frame_count; ++m) {
    const std::complex<double>* src = samples.data() + m * hop;
    for (std::size_t i = 0; i < fft_len; ++i) frame[i] = src[i] * window[i];
    plan.forward(frame.data());
    std::copy(frame.begin(), frame.end(), out.values.begin() + m * fft_len);
  }
  return out;
}

Mfp mean_frequency_profile(const Stft& spectrogram) {
  if (spectrogram.frames() == 0 || spectrogram.fft_len == 0)
    throw EmptyInputError("mean frequency profile: no frames");
  Mfp out;
  out.bin_hz = spectrogram.bin_hz();
  out.values.assign(spectrogram.bins(), 0.0);
  for (std::size_t m = 0; m < spectrogram.frames(); ++m) {
    const std::complex<double>* col = spectrogram.values.data() + m * spectrogram.fft_len;
    for (std::size_t v = 0; v < spectrogram.bins(); ++v) out.values[v] += std::abs(col[v]);
  }
  const double inv = 1.0 / static_cast<double>(spectrogram.frames());
  for (double& v : out.values) v *= inv;
  return out;
}

std::vector<double> welch_psd(const IqRecording& rec, std::size_t fft_len,
                              WindowKind window) {
  if (!(rec.sample_rate_hz > 0.0)) throw InvalidArgument("welch: recording has no sample rate");
  const auto w = window_coefficients(window, fft_len);
  const Stft grid = stft(rec.samples, rec.sample_rate_hz, fft_len,
                         std::max<std::size_t>(1, fft_len / 2), std::span<const double>(w));
  double u = 0.0;
  for (const double c : w) u += c * c;
  std::vector<double> psd(grid.bins(), 0.0);
  for (std::size_t m = 0; m < grid.frames(); ++m) {
    const std::complex<double>* col = grid.values.data() + m * grid.fft_len;
    for (std::size_t v = 0; v < grid.bins(); ++v) psd[v] += std::norm(col[v]);
  }
  const double scale =
      1.0 / (static_cast<double>(grid.frames()) * rec.sample_rate_hz * u);
  for (double& v : psd) v *= scale;
  return psd;
}

}  // namespace rfsc
