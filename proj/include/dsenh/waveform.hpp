#ifndef DSENH_WAVEFORM_HPP
#define DSENH_WAVEFORM_HPP

#include <cstddef>
#include <vector>

#include "dsenh/common.hpp"

namespace dsenh {

// Mono audio signal. Samples are dimensionless amplitudes, nominally in
// [-1, 1]; everything downstream of ingestion runs at 16 kHz.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  void validate() const {
    require(sample_rate > 0, "waveform: sample rate must be positive");
    require(all_finite(samples), "waveform: non-finite sample");
  }
};

inline double energy(const std::vector<float>& x) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  return e;
}

inline double energy(const Waveform& w) { return energy(w.samples); }

inline double rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  return std::sqrt(energy(w) / static_cast<double>(w.samples.size()));
}

inline float peak_abs(const Waveform& w) {
  float p = 0.0f;
  for (float v : w.samples) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace dsenh

#endif
