#ifndef DSENH_RESAMPLE_HPP
#define DSENH_RESAMPLE_HPP

#include <numeric>
#include <vector>

#include "dsenh/common.hpp"
#include "dsenh/waveform.hpp"

namespace dsenh {

// Rational-ratio polyphase resampler. Kernel: Hann-windowed sinc, 32 input
// samples half-width, cutoff at 95% of the narrower Nyquist, unity DC gain
// per phase. Signals are zero-extended at the edges.
class SincResampler {
 public:
  SincResampler(int in_rate, int out_rate) : in_rate_(in_rate), out_rate_(out_rate) {
    require(in_rate > 0 && out_rate > 0, "resample: rates must be positive");
    const int g = std::gcd(in_rate, out_rate);
    p_ = out_rate / g;
    q_ = in_rate / g;
    const double cutoff = 0.5 * 0.95 * std::min(1.0, static_cast<double>(p_) / q_);
    phases_.resize(p_);
    for (int r = 0; r < p_; ++r) {
      // Output n at input position t = n*q/p; phase r covers fractional
      // offsets frac = (r*q mod p)/p.
      const double frac = static_cast<double>(r) * q_ / p_ -
                          std::floor(static_cast<double>(r) * q_ / p_);
      std::vector<double>& taps = phases_[r];
      taps.resize(2 * kHalfWidth + 1);
      double sum = 0.0;
      for (int m = -kHalfWidth; m <= kHalfWidth; ++m) {
        const double t = static_cast<double>(m) - frac;
        double v = 2.0 * cutoff;
        if (t != 0.0) {
          v = std::sin(2.0 * M_PI * cutoff * t) / (M_PI * t);
        }
        const double w = 0.5 * (1.0 + std::cos(M_PI * t / (kHalfWidth + 1)));
        v *= (std::abs(t) <= kHalfWidth + 1) ? w : 0.0;
        taps[m + kHalfWidth] = v;
        sum += v;
      }
      for (double& v : taps) v /= sum;
    }
  }

  std::vector<float> process(const std::vector<float>& x) const {
    if (p_ == 1 && q_ == 1) return x;
    const size_t n_in = x.size();
    const size_t n_out =
        (n_in * static_cast<size_t>(p_) + q_ - 1) / static_cast<size_t>(q_);
    std::vector<float> y(n_out, 0.0f);
    for (size_t n = 0; n < n_out; ++n) {
      const size_t num = n * static_cast<size_t>(q_);
      const size_t base = num / p_;  // integer part of input position
      const int r = static_cast<int>(n % p_);
      const std::vector<double>& taps = phases_[r];
      double acc = 0.0;
      for (int m = -kHalfWidth; m <= kHalfWidth; ++m) {
        const long long k = static_cast<long long>(base) + m;
        if (k < 0 || k >= static_cast<long long>(n_in)) continue;
        acc += taps[m + kHalfWidth] * x[static_cast<size_t>(k)];
      }
      y[n] = static_cast<float>(acc);
    }
    return y;
  }

 private:
  static constexpr int kHalfWidth = 32;
  int in_rate_, out_rate_;
  int p_ = 1, q_ = 1;
  std::vector<std::vector<double>> phases_;
};

inline Waveform resample(const Waveform& w, int out_rate) {
  if (w.sample_rate == out_rate) return w;
  SincResampler rs(w.sample_rate, out_rate);
  Waveform out;
  out.sample_rate = out_rate;
  out.samples = rs.process(w.samples);
  return out;
}

}  // namespace dsenh

#endif
