#ifndef DSENH_MASKING_HPP
#define DSENH_MASKING_HPP

#include <algorithm>
#include <complex>

#include "dsenh/stft.hpp"

namespace dsenh {

// Complex T-F mask on the same grid as the spectrogram it applies to.
template <typename T>
using ComplexMaskT = Spectrogram<T>;

using ComplexMask = ComplexMaskT<double>;

constexpr double kCirmEps = 1e-8;

// Complex ideal ratio mask: M = (Y* . S) / max(|Y|^2, eps) elementwise,
// expanded into real/imaginary parts. The floor keeps silent cells finite.
template <typename T>
ComplexMaskT<T> compute_cirm(const Spectrogram<T>& S, const Spectrogram<T>& Y,
                             T eps = static_cast<T>(kCirmEps)) {
  require(S.same_grid(Y), "compute_cirm: S and Y grids differ");
  require(eps > T(0), "compute_cirm: eps must be positive");
  ComplexMaskT<T> M(Y.bins, Y.frames);
  for (size_t i = 0; i < Y.data.size(); ++i) {
    const T yr = Y.data[i].real(), yi = Y.data[i].imag();
    const T sr = S.data[i].real(), si = S.data[i].imag();
    const T den = std::max(yr * yr + yi * yi, eps);
    M.data[i] = std::complex<T>((yr * sr + yi * si) / den,
                                (yr * si - yi * sr) / den);
  }
  return M;
}

// Elementwise complex product S_hat = M . Y.
template <typename T>
Spectrogram<T> apply_mask(const ComplexMaskT<T>& M, const Spectrogram<T>& Y) {
  require(M.same_grid(Y), "apply_mask: mask and spectrogram grids differ");
  Spectrogram<T> S(Y.bins, Y.frames);
  for (size_t i = 0; i < Y.data.size(); ++i) S.data[i] = M.data[i] * Y.data[i];
  return S;
}

// Gradient of apply_mask with respect to the mask (Y held constant), with
// real and imaginary parts treated as independent real variables.
template <typename T>
ComplexMaskT<T> apply_mask_grad_mask(const Spectrogram<T>& grad_shat,
                                     const Spectrogram<T>& Y) {
  require(grad_shat.same_grid(Y), "apply_mask_grad_mask: grid mismatch");
  ComplexMaskT<T> G(Y.bins, Y.frames);
  for (size_t i = 0; i < Y.data.size(); ++i) {
    const T gr = grad_shat.data[i].real(), gi = grad_shat.data[i].imag();
    const T yr = Y.data[i].real(), yi = Y.data[i].imag();
    // S_r = M_r Y_r - M_i Y_i ; S_i = M_r Y_i + M_i Y_r
    G.data[i] = std::complex<T>(gr * yr + gi * yi, -gr * yi + gi * yr);
  }
  return G;
}

struct MaskClampStats {
  size_t total = 0;
  size_t clamped = 0;
  double rate() const { return total ? static_cast<double>(clamped) / total : 0.0; }
};

// Clamp mask magnitudes to max_abs, preserving phase. Training targets use
// this to keep low-|Y| cells from blowing up the loss scale.
template <typename T>
MaskClampStats clamp_mask(ComplexMaskT<T>& M, T max_abs = T(10)) {
  MaskClampStats st;
  st.total = M.data.size();
  for (auto& m : M.data) {
    const T mag = std::abs(m);
    if (mag > max_abs) {
      m *= max_abs / mag;
      ++st.clamped;
    }
  }
  return st;
}

}  // namespace dsenh

#endif
