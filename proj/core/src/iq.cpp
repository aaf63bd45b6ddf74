#include "rfsc/iq.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "rfsc/errors.hpp"

namespace rfsc {
namespace {

std::vector<std::uint8_t> read_all_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  if (end < 0) throw IoError("cannot stat " + path.string());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(end));
  if (end > 0) in.read(reinterpret_cast<char*>(bytes.data()), end);
  if (!in) throw IoError("cannot read " + path.string());
  return bytes;
}

std::uint16_t load_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t load_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

float load_f32le(const std::uint8_t* p) { return std::bit_cast<float>(load_u32le(p)); }

bool has_tag(const std::uint8_t* p, const char* tag) {
  return std::memcmp(p, tag, 4) == 0;
}

}  // namespace

IqRecording load_wav_iq(const std::filesystem::path& path) {
  const auto bytes = read_all_bytes(path);
  if (bytes.size() < 12) throw TruncationError("WAV shorter than RIFF header", bytes.size());
  if (!has_tag(bytes.data(), "RIFF")) throw FormatError("WAV missing RIFF magic");
  if (!has_tag(bytes.data() + 8, "WAVE")) throw FormatError("WAV missing WAVE form type");

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t sample_rate = 0;

  std::size_t off = 12;
  while (off < bytes.size()) {
    if (off + 8 > bytes.size())
      throw TruncationError("WAV chunk header cut short", bytes.size());
    const std::uint8_t* hdr = bytes.data() + off;
    const std::uint32_t chunk_size = load_u32le(hdr + 4);
    const std::size_t body = off + 8;
    if (body + chunk_size > bytes.size())
      throw TruncationError(std::string("WAV chunk '") +
                                std::string(reinterpret_cast<const char*>(hdr), 4) +
                                "' extends past end of file",
                            bytes.size());

    if (has_tag(hdr, "fmt ")) {
      if (chunk_size < 16) throw FormatError("WAV fmt chunk too small");
      const std::uint8_t* fmt = bytes.data() + body;
      const std::uint16_t audio_format = load_u16le(fmt);
      channels = load_u16le(fmt + 2);
      sample_rate = load_u32le(fmt + 4);
      bits = load_u16le(fmt + 14);
      if (audio_format != 1)
        throw UnsupportedLayoutError("WAV is not integer PCM (format tag " +
                                     std::to_string(audio_format) + ")");
      if (channels != 2)
        throw UnsupportedLayoutError("WAV has " + std::to_string(channels) +
                                     " channels, need 2 (I/Q)");
      if (bits != 16)
        throw UnsupportedLayoutError("WAV has " + std::to_string(bits) +
                                     "-bit samples, need 16");
      if (sample_rate == 0) throw FormatError("WAV sample rate is zero");
      have_fmt = true;
    } else if (has_tag(hdr, "data")) {
      if (!have_fmt) throw FormatError("WAV data chunk before fmt chunk");
      if (chunk_size % 4 != 0)
        throw FormatError("WAV data size is not a whole number of I/Q frames");
      const std::uint8_t* data = bytes.data() + body;
      const std::size_t frames = chunk_size / 4;
      IqRecording rec;
      rec.sample_rate_hz = static_cast<double>(sample_rate);
      rec.origin = path.string();
      rec.samples.resize(frames);
      for (std::size_t k = 0; k < frames; ++k) {
        const auto i = static_cast<std::int16_t>(load_u16le(data + 4 * k));
        const auto q = static_cast<std::int16_t>(load_u16le(data + 4 * k + 2));
        rec.samples[k] = {i / 32768.0, q / 32768.0};
      }
      return rec;
    }
    off = body + chunk_size + (chunk_size & 1);
  }
  throw FormatError(have_fmt ? "WAV missing data chunk" : "WAV missing fmt chunk");
}

IqRecording load_raw_cf32(const std::filesystem::path& path, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("cf32 load: sample rate must be > 0");
  const auto bytes = read_all_bytes(path);
  if (bytes.size() % 8 != 0)
    throw TruncationError("cf32 file ends mid-sample", bytes.size() - bytes.size() % 8);
  IqRecording rec;
  rec.sample_rate_hz = sample_rate_hz;
  rec.origin = path.string();
  const std::size_t n = bytes.size() / 8;
  rec.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const float re = load_f32le(bytes.data() + 8 * k);
    const float im = load_f32le(bytes.data() + 8 * k + 4);
    if (!std::isfinite(re) || !std::isfinite(im))
      throw DecodeError("cf32 sample is not finite", k);
    rec.samples[k] = {re, im};
  }
  return rec;
}

void write_raw_cf32(const std::filesystem::path& path, const IqRecording& rec) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::vector<std::uint8_t> buf(rec.samples.size() * 8);
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    const auto re = std::bit_cast<std::uint32_t>(static_cast<float>(rec.samples[k].real()));
    const auto im = std::bit_cast<std::uint32_t>(static_cast<float>(rec.samples[k].imag()));
    for (int b = 0; b < 4; ++b) {
      buf[8 * k + b] = static_cast<std::uint8_t>((re >> (8 * b)) & 0xff);
      buf[8 * k + 4 + b] = static_cast<std::uint8_t>((im >> (8 * b)) & 0xff);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

std::vector<Segment> segment_fixed_cadence(const IqRecording& rec, double interval_s,
                                           double window_s) {
  if (!(rec.sample_rate_hz > 0.0))
    throw InvalidArgument("segmentation: recording has no sample rate");
  if (!(interval_s > 0.0) || !(window_s > 0.0))
    throw InvalidArgument("segmentation: cadence values must be > 0");
  if (window_s > interval_s)
    throw InvalidArgument("segmentation: window longer than interval");

  // One rounding to integer samples keeps the segment count exact; the
  // seconds-domain count formula then holds by construction.
  const auto window = static_cast<std::size_t>(std::llround(window_s * rec.sample_rate_hz));
  const auto interval =
      static_cast<std::size_t>(std::llround(interval_s * rec.sample_rate_hz));
  if (window == 0) throw InvalidArgument("segmentation: window shorter than one sample");

  std::vector<Segment> out;
  const std::size_t n = rec.samples.size();
  if (n < window) return out;
  const std::size_t count = (n - window) / interval + 1;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Segment seg;
    const std::size_t begin = k * interval;
    seg.samples.assign(rec.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       rec.samples.begin() + static_cast<std::ptrdiff_t>(begin + window));
    seg.start_s = static_cast<double>(begin) / rec.sample_rate_hz;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace rfsc
