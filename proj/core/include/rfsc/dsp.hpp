#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rfsc/iq.hpp"

namespace rfsc {

struct BandpassSpec {
  double low_cut_hz = 0.0;
  double high_cut_hz = 0.0;
  int order = 5;  // prototype order; the bandpass has twice as many poles
};

/// One biquad, direct form coefficients with a0 normalized to 1.
struct Sos {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
  std::vector<Sos> sections;

  /// True when every section's poles are strictly inside the unit circle.
  bool stable() const;
};

/// Butterworth band-pass as cascaded biquads via the analog prototype:
/// pole placement on the unit circle, low-pass to band-pass transform of
/// the prewarped edges, bilinear mapping, then pole pairing into
/// second-order sections ordered by pole radius.
SosFilter design_butterworth_bandpass(const BandpassSpec& spec, double sample_rate_hz);

/// Runs the cascade over the complex samples (direct form II transposed,
/// zero initial state).
IqRecording apply_filter(const IqRecording& rec, const SosFilter& filter);

/// Cascade magnitude response at a frequency, for response checks.
double sos_magnitude(const SosFilter& filter, double freq_hz, double sample_rate_hz);

enum class WindowKind { Hann, Hamming, Blackman };

std::string window_name(WindowKind kind);
WindowKind window_from_name(const std::string& name);

/// Periodic (DFT-even) window coefficients.
std::vector<double> window_coefficients(WindowKind kind, std::size_t length);

/// Complex-input short-time Fourier transform. Full two-sided spectrum:
/// bins() == fft_len, frame m covers samples [m*hop, m*hop + fft_len).
struct Stft {
  std::vector<std::complex<double>> values;  // column-major: bin + frame * bins
  std::size_t fft_len = 0;
  std::size_t hop = 0;
  std::size_t frame_count = 0;
  double sample_rate_hz = 0.0;

  std::size_t bins() const noexcept { return fft_len; }
  std::size_t frames() const noexcept { return frame_count; }
  double bin_hz() const { return sample_rate_hz / static_cast<double>(fft_len); }

  std::complex<double> at(std::size_t bin, std::size_t frame) const {
    return values[bin + frame * fft_len];
  }
};

Stft stft(std::span<const std::complex<double>> samples, double sample_rate_hz,
          std::size_t fft_len, std::size_t hop, WindowKind window);

/// Same transform with caller-supplied window coefficients
/// (window.size() must equal fft_len).
Stft stft(std::span<const std::complex<double>> samples, double sample_rate_hz,
          std::size_t fft_len, std::size_t hop, std::span<const double> window);

/// Spectral signature: per-bin mean magnitude across STFT frames.
struct Mfp {
  std::vector<double> values;
  double bin_hz = 0.0;
};

Mfp mean_frequency_profile(const Stft& spectrogram);

/// Welch power spectral density over 50%-overlapped windowed frames,
/// in power per hz. Two-sided, bin k at k * fs / fft_len.
std::vector<double> welch_psd(const IqRecording& rec, std::size_t fft_len,
                              WindowKind window);

}  // namespace rfsc
