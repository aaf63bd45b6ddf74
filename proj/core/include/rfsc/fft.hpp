#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rfsc {

/// Reusable forward-DFT plan. Power-of-two lengths run an in-place
/// iterative radix-2 transform with precomputed twiddles; other lengths
/// go through Bluestein's chirp-z reduction to a power-of-two size.
class Fft {
public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// In-place forward transform, X[k] = sum_n x[n] exp(-2*pi*i*k*n/N).
  /// No normalization.
  void forward(std::complex<double>* data) const;

  void forward(std::vector<std::complex<double>>& data) const;

private:
  void forward_pow2(std::complex<double>* data, std::size_t n,
                    const std::vector<std::size_t>& bitrev,
                    const std::vector<std::complex<double>>& twiddle) const;

  std::size_t n_ = 0;
  // radix-2 tables for n_ itself when it is a power of two
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
  // Bluestein state (empty when n_ is a power of two)
  std::size_t conv_len_ = 0;
  std::vector<std::size_t> conv_bitrev_;
  std::vector<std::complex<double>> conv_twiddle_;
  std::vector<std::complex<double>> chirp_;         // exp(-i*pi*k^2/n)
  std::vector<std::complex<double>> chirp_kernel_;  // FFT of padded conjugate chirp
};

}  // namespace rfsc
