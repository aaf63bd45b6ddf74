#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

namespace rfsc {

/// Complex-baseband capture. Samples are unit-scale doubles regardless
/// of the on-disk encoding (int16 WAV is scaled by 1/32768).
struct IqRecording {
  std::vector<std::complex<double>> samples;
  double sample_rate_hz = 0.0;
  std::string origin;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct Segment {
  std::vector<std::complex<double>> samples;
  double start_s = 0.0;
  std::string label;
};

/// Reads a 2-channel 16-bit PCM WAV, channel 0 as I and channel 1 as Q.
IqRecording load_wav_iq(const std::filesystem::path& path);

/// Reads raw interleaved float32 I/Q (the usual SDR capture dump).
IqRecording load_raw_cf32(const std::filesystem::path& path, double sample_rate_hz);

void write_raw_cf32(const std::filesystem::path& path, const IqRecording& rec);

/// Cuts fixed-cadence windows: one segment of window_s seconds every
/// interval_s seconds, front-aligned. A recording shorter than one
/// window yields no segments.
std::vector<Segment> segment_fixed_cadence(const IqRecording& rec, double interval_s,
                                           double window_s);

}  // namespace rfsc
