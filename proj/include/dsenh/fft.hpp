#ifndef DSENH_FFT_HPP
#define DSENH_FFT_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "dsenh/common.hpp"

namespace dsenh {

inline bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT. sign = -1 forward, +1 inverse (unscaled).
template <typename T>
void fft_inplace(std::vector<std::complex<T>>& a, int sign) {
  const size_t n = a.size();
  require(is_power_of_two(n), "fft: size must be a power of two");
  // Bit reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<T> wlen(static_cast<T>(std::cos(ang)),
                               static_cast<T>(std::sin(ang)));
    for (size_t i = 0; i < n; i += len) {
      std::complex<T> w(1, 0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<T> u = a[i + k];
        std::complex<T> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Real-input FFT, returns the n/2+1 non-redundant bins of
// X_k = sum_n x_n exp(-2*pi*i*k*n/N).
template <typename T>
std::vector<std::complex<T>> rfft(const std::vector<T>& x) {
  const size_t n = x.size();
  std::vector<std::complex<T>> buf(n);
  for (size_t i = 0; i < n; ++i) buf[i] = std::complex<T>(x[i], 0);
  fft_inplace(buf, -1);
  buf.resize(n / 2 + 1);
  return buf;
}

// Inverse of rfft for a real target signal of length n. Imaginary parts of
// the DC and Nyquist bins are ignored (a real signal has none).
template <typename T>
std::vector<T> irfft(const std::vector<std::complex<T>>& spec, size_t n) {
  require(spec.size() == n / 2 + 1, "irfft: bin count inconsistent with n");
  std::vector<std::complex<T>> buf(n);
  buf[0] = std::complex<T>(spec[0].real(), 0);
  buf[n / 2] = std::complex<T>(spec[n / 2].real(), 0);
  for (size_t k = 1; k < n / 2; ++k) {
    buf[k] = spec[k];
    buf[n - k] = std::conj(spec[k]);
  }
  fft_inplace(buf, +1);
  std::vector<T> out(n);
  const T scale = static_cast<T>(1.0 / static_cast<double>(n));
  for (size_t i = 0; i < n; ++i) out[i] = buf[i].real() * scale;
  return out;
}

// Adjoint of irfft as a linear map R^{2*(n/2+1)} -> R^n, with the real/imag
// parts of each bin treated as independent real variables. Needed for
// backpropagation through synthesis.
template <typename T>
std::vector<std::complex<T>> irfft_adjoint(const std::vector<T>& grad_time) {
  const size_t n = grad_time.size();
  std::vector<std::complex<T>> g = rfft(grad_time);
  const T inv_n = static_cast<T>(1.0 / static_cast<double>(n));
  for (size_t k = 0; k < g.size(); ++k) {
    T c = (k == 0 || k == n / 2) ? inv_n : T(2) * inv_n;
    g[k] *= c;
  }
  g[0] = std::complex<T>(g[0].real(), 0);
  g[n / 2] = std::complex<T>(g[n / 2].real(), 0);
  return g;
}

}  // namespace dsenh

#endif
