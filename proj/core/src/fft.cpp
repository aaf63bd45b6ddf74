#include "rfsc/fft.hpp"

#include <numbers>

#include "rfsc/errors.hpp"

namespace rfsc {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::size_t> make_bitrev(std::size_t n) {
  std::vector<std::size_t> rev(n, 0);
  for (std::size_t i = 1; i < n; ++i) rev[i] = (rev[i >> 1] >> 1) | (i & 1 ? n >> 1 : 0);
  return rev;
}

std::vector<std::complex<double>> make_twiddle(std::size_t n) {
  std::vector<std::complex<double>> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    tw[k] = std::polar(1.0, angle);
  }
  return tw;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidArgument("fft: zero length");
  if (is_pow2(n)) {
    bitrev_ = make_bitrev(n);
    twiddle_ = make_twiddle(n);
    return;
  }
  // Bluestein: X[k] = chirp[k] * circular_conv(x*chirp, conj-chirp)[k]
  conv_len_ = next_pow2(2 * n - 1);
  conv_bitrev_ = make_bitrev(conv_len_);
  conv_twiddle_ = make_twiddle(conv_len_);
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // reduce k^2 mod 2n before the float divide so large indices keep
    // full phase accuracy
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    const double angle = -std::numbers::pi * static_cast<double>(k2) /
                         static_cast<double>(n);
    chirp_[k] = std::polar(1.0, angle);
  }
  chirp_kernel_.assign(conv_len_, {0.0, 0.0});
  chirp_kernel_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    chirp_kernel_[k] = std::conj(chirp_[k]);
    chirp_kernel_[conv_len_ - k] = std::conj(chirp_[k]);
  }
  forward_pow2(chirp_kernel_.data(), conv_len_, conv_bitrev_, conv_twiddle_);
}

void Fft::forward_pow2(std::complex<double>* data, std::size_t n,
                       const std::vector<std::size_t>& bitrev,
                       const std::vector<std::complex<double>>& twiddle) const {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::complex<double> w = twiddle[j * step];
        const std::complex<double> u = data[start + j];
        const std::complex<double> t = w * data[start + j + half];
        data[start + j] = u + t;
        data[start + j + half] = u - t;
      }
    }
  }
}

void Fft::forward(std::complex<double>* data) const {
  if (conv_len_ == 0) {
    forward_pow2(data, n_, bitrev_, twiddle_);
    return;
  }
  std::vector<std::complex<double>> a(conv_len_, {0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
  forward_pow2(a.data(), conv_len_, conv_bitrev_, conv_twiddle_);
  for (std::size_t i = 0; i < conv_len_; ++i) a[i] = std::conj(a[i] * chirp_kernel_[i]);
  forward_pow2(a.data(), conv_len_, conv_bitrev_, conv_twiddle_);
  const double inv = 1.0 / static_cast<double>(conv_len_);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(a[k]) * inv * chirp_[k];
}

void Fft::forward(std::vector<std::complex<double>>& data) const {
  if (data.size() != n_) throw ShapeError("fft: buffer length does not match plan");
  forward(data.data());
}

}  // namespace rfsc
