#ifndef DSENH_STFT_HPP
#define DSENH_STFT_HPP

#include <complex>
#include <string>
#include <vector>

#include "dsenh/common.hpp"
#include "dsenh/fft.hpp"
#include "dsenh/waveform.hpp"

namespace dsenh {

enum class WindowKind { SqrtHann, Hann, Rect };

inline std::string window_kind_name(WindowKind k) {
  switch (k) {
    case WindowKind::SqrtHann: return "sqrt_hann";
    case WindowKind::Hann: return "hann";
    case WindowKind::Rect: return "rect";
  }
  return "?";
}

inline WindowKind window_kind_from_name(const std::string& s) {
  if (s == "sqrt_hann") return WindowKind::SqrtHann;
  if (s == "hann") return WindowKind::Hann;
  if (s == "rect") return WindowKind::Rect;
  throw ValidationError("unknown window kind: " + s);
}

// Analysis/synthesis framing. The same window kind is used on both sides;
// sqrt-Hann pairs satisfy COLA at hop <= fft_size/2.
struct StftConfig {
  int fft_size = 512;
  int hop = 256;
  WindowKind window = WindowKind::SqrtHann;

  int bins() const { return fft_size / 2 + 1; }

  void validate() const {
    require(fft_size > 0 && is_power_of_two(static_cast<size_t>(fft_size)),
            "stft: fft_size must be a power of two");
    require(hop > 0 && fft_size % hop == 0, "stft: hop must divide fft_size");
    require(hop <= fft_size / 2 || window == WindowKind::Rect,
            "stft: hop must be <= fft_size/2");
  }
};

template <typename T>
std::vector<T> make_window(WindowKind kind, int n) {
  std::vector<T> w(n);
  for (int i = 0; i < n; ++i) {
    // Periodic Hann.
    double h = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
    switch (kind) {
      case WindowKind::SqrtHann: w[i] = static_cast<T>(std::sqrt(h)); break;
      case WindowKind::Hann: w[i] = static_cast<T>(h); break;
      case WindowKind::Rect: w[i] = T(1); break;
    }
  }
  return w;
}

// Max deviation of sum_l w_a(n - l*hop) * w_s(n - l*hop) from its mean,
// evaluated where all shifts are present. Constant-overlap-add holds when
// this is ~0.
inline double cola_deviation(const StftConfig& cfg) {
  auto w = make_window<double>(cfg.window, cfg.fft_size);
  std::vector<double> acc(cfg.fft_size, 0.0);
  for (int shift = 0; shift < cfg.fft_size; shift += cfg.hop) {
    for (int i = 0; i + shift < cfg.fft_size; ++i) {
      acc[i] += w[i + shift] * w[i + shift];  // analysis * synthesis
    }
  }
  // Positions [0, hop) see every shifted copy.
  double lo = acc[0], hi = acc[0];
  for (int i = 1; i < cfg.hop; ++i) {
    lo = std::min(lo, acc[i]);
    hi = std::max(hi, acc[i]);
  }
  return hi - lo;
}

// Half-spectrum time-frequency grid, frame-major storage (bins contiguous
// within a frame).
template <typename T>
struct Spectrogram {
  int bins = 0;
  int frames = 0;
  std::vector<std::complex<T>> data;

  Spectrogram() = default;
  Spectrogram(int bins_, int frames_)
      : bins(bins_), frames(frames_),
        data(static_cast<size_t>(bins_) * frames_) {}

  std::complex<T>& at(int k, int l) {
    return data[static_cast<size_t>(l) * bins + k];
  }
  const std::complex<T>& at(int k, int l) const {
    return data[static_cast<size_t>(l) * bins + k];
  }
  std::complex<T>* frame(int l) { return data.data() + static_cast<size_t>(l) * bins; }
  const std::complex<T>* frame(int l) const {
    return data.data() + static_cast<size_t>(l) * bins;
  }

  bool same_grid(const Spectrogram& o) const {
    return bins == o.bins && frames == o.frames;
  }

  bool finite() const {
    for (const auto& z : data) {
      if (!std::isfinite(static_cast<double>(z.real())) ||
          !std::isfinite(static_cast<double>(z.imag())))
        return false;
    }
    return true;
  }
};

using ComplexSpectrogram = Spectrogram<double>;

namespace detail {

// Reflect-pad fft_size/2 samples at both ends so frame l is centered on
// sample l*hop of the original signal.
template <typename T>
std::vector<T> reflect_pad(const std::vector<T>& x, int pad) {
  const int n = static_cast<int>(x.size());
  require(n > pad, "stft: signal too short to reflect-pad");
  std::vector<T> out(n + 2 * pad);
  for (int i = 0; i < pad; ++i) out[i] = x[pad - i];
  for (int i = 0; i < n; ++i) out[pad + i] = x[i];
  for (int i = 0; i < pad; ++i) out[pad + n + i] = x[n - 2 - i];
  return out;
}

}  // namespace detail

// STFT of a raw sample buffer. Frame count is floor(len/hop) + 1 after the
// reflect padding (equivalently floor((padded_len - fft_size)/hop) + 1).
template <typename T>
Spectrogram<T> stft_samples(const std::vector<T>& samples, const StftConfig& cfg) {
  cfg.validate();
  require(!samples.empty(), "stft: empty signal");
  require(static_cast<int>(samples.size()) >= cfg.fft_size,
          "stft: signal shorter than one frame (need >= fft_size samples)");
  require(all_finite(samples), "stft: non-finite sample");

  const int n = cfg.fft_size;
  const int pad = n / 2;
  std::vector<T> x = detail::reflect_pad(samples, pad);
  const int padded = static_cast<int>(x.size());
  const int frames = (padded - n) / cfg.hop + 1;

  const std::vector<T> win = make_window<T>(cfg.window, n);
  Spectrogram<T> spec(cfg.bins(), frames);
  std::vector<T> buf(n);
  for (int l = 0; l < frames; ++l) {
    const T* src = x.data() + static_cast<size_t>(l) * cfg.hop;
    for (int i = 0; i < n; ++i) buf[i] = src[i] * win[i];
    std::vector<std::complex<T>> bins = rfft(buf);
    std::copy(bins.begin(), bins.end(), spec.frame(l));
  }
  return spec;
}

// Weighted overlap-add synthesis, normalized by the realized
// analysis*synthesis window sum. Output length is (frames-1)*hop + fft_size
// in the padded domain; callers that came through stft() trim fft_size/2
// from the front.
template <typename T>
std::vector<T> istft_samples(const Spectrogram<T>& spec, const StftConfig& cfg) {
  cfg.validate();
  require(spec.bins == cfg.bins(), "istft: bin count does not match config");
  require(spec.frames >= 1, "istft: no frames");

  const int n = cfg.fft_size;
  const size_t out_len = static_cast<size_t>(spec.frames - 1) * cfg.hop + n;
  const std::vector<T> win = make_window<T>(cfg.window, n);

  std::vector<T> out(out_len, T(0));
  std::vector<T> denom(out_len, T(0));
  std::vector<std::complex<T>> frame_bins(spec.bins);
  for (int l = 0; l < spec.frames; ++l) {
    std::copy(spec.frame(l), spec.frame(l) + spec.bins, frame_bins.begin());
    std::vector<T> t = irfft(frame_bins, n);
    const size_t off = static_cast<size_t>(l) * cfg.hop;
    for (int i = 0; i < n; ++i) {
      out[off + i] += win[i] * t[i];
      denom[off + i] += win[i] * win[i];
    }
  }
  const T tiny = static_cast<T>(1e-8);
  for (size_t i = 0; i < out_len; ++i) {
    if (denom[i] > tiny) out[i] /= denom[i];
  }
  return out;
}

// Adjoint of istft_samples as a linear map from bins to time samples;
// propagates a time-domain gradient back onto the spectrogram grid.
template <typename T>
Spectrogram<T> istft_adjoint(const std::vector<T>& grad_time, int frames,
                             const StftConfig& cfg) {
  cfg.validate();
  const int n = cfg.fft_size;
  const size_t out_len = static_cast<size_t>(frames - 1) * cfg.hop + n;
  require(grad_time.size() == out_len, "istft_adjoint: length mismatch");

  const std::vector<T> win = make_window<T>(cfg.window, n);
  std::vector<T> denom(out_len, T(0));
  for (int l = 0; l < frames; ++l) {
    const size_t off = static_cast<size_t>(l) * cfg.hop;
    for (int i = 0; i < n; ++i) denom[off + i] += win[i] * win[i];
  }
  const T tiny = static_cast<T>(1e-8);
  std::vector<T> g(grad_time);
  for (size_t i = 0; i < out_len; ++i) {
    if (denom[i] > tiny) g[i] /= denom[i];
  }

  Spectrogram<T> grad_spec(cfg.bins(), frames);
  std::vector<T> seg(n);
  for (int l = 0; l < frames; ++l) {
    const size_t off = static_cast<size_t>(l) * cfg.hop;
    for (int i = 0; i < n; ++i) seg[i] = win[i] * g[off + i];
    std::vector<std::complex<T>> gb = irfft_adjoint(seg);
    std::copy(gb.begin(), gb.end(), grad_spec.frame(l));
  }
  return grad_spec;
}

inline ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  w.validate();
  std::vector<double> x(w.samples.begin(), w.samples.end());
  return stft_samples(x, cfg);
}

inline Waveform istft(const ComplexSpectrogram& spec, const StftConfig& cfg) {
  std::vector<double> y = istft_samples(spec, cfg);
  Waveform w;
  w.sample_rate = kSampleRate;
  w.samples.assign(y.begin(), y.end());
  return w;
}

// Undo the reflect padding: recover `target_len` samples aligned with the
// original signal that produced `frames` STFT frames.
template <typename T>
std::vector<T> trim_padded(const std::vector<T>& synth, size_t target_len,
                           const StftConfig& cfg) {
  const size_t pad = static_cast<size_t>(cfg.fft_size) / 2;
  std::vector<T> out(target_len, T(0));
  for (size_t i = 0; i < target_len && pad + i < synth.size(); ++i) {
    out[i] = synth[pad + i];
  }
  return out;
}

}  // namespace dsenh

#endif
