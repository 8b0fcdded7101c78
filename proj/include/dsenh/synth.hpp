#ifndef DSENH_SYNTH_HPP
#define DSENH_SYNTH_HPP

#include <cmath>
#include <vector>

#include "dsenh/common.hpp"
#include "dsenh/rng.hpp"
#include "dsenh/waveform.hpp"

namespace dsenh {

// Parametric rotor-noise model: a stack of harmonics over a (possibly
// time-varying) fundamental, slow amplitude modulation, and an optional
// filtered broadband floor. Identical spec + seed always produces identical
// samples.
struct NoiseSynthSpec {
  std::vector<double> f0_trajectory_hz = {90.0};  // control points, lerped
  int harmonic_count = 24;
  std::vector<double> harmonic_gains;  // empty => 1/h rolloff
  double floor_level_db = -30.0;       // relative to harmonic RMS; <= -200 off
  double am_depth = 0.0;               // 0 = none
  double am_rate_hz = 4.0;
  uint64_t seed = 0;
};

inline Waveform synth_drone_noise(const NoiseSynthSpec& spec, double duration_s,
                                  int sr = kSampleRate) {
  require(duration_s > 0.0, "synth_drone_noise: duration must be positive");
  require(!spec.f0_trajectory_hz.empty(),
          "synth_drone_noise: empty f0 trajectory");
  require(spec.harmonic_count >= 0, "synth_drone_noise: negative harmonics");
  double f0_max = 0.0;
  for (double f : spec.f0_trajectory_hz) {
    require(f > 0.0, "synth_drone_noise: f0 must be positive");
    f0_max = std::max(f0_max, f);
  }
  require(spec.harmonic_count * f0_max < sr / 2.0,
          "synth_drone_noise: harmonic above Nyquist");

  const size_t n = static_cast<size_t>(std::llround(duration_s * sr));
  Waveform w;
  w.sample_rate = sr;
  w.samples.assign(n, 0.0f);
  if (n == 0) return w;

  Rng rng(spec.seed);
  std::vector<double> phase0(spec.harmonic_count);
  std::vector<double> gains(spec.harmonic_count);
  for (int h = 0; h < spec.harmonic_count; ++h) {
    phase0[h] = rng.uniform(0.0, 2.0 * M_PI);
    gains[h] = h < static_cast<int>(spec.harmonic_gains.size())
                   ? spec.harmonic_gains[h]
                   : 1.0 / (h + 1);
  }
  const double am_phase = rng.uniform(0.0, 2.0 * M_PI);

  // Integrate the fundamental phase so harmonics stay continuous while f0
  // moves along the trajectory.
  std::vector<double> harm(n, 0.0);
  const size_t segs = spec.f0_trajectory_hz.size();
  double fund_phase = 0.0;
  double harm_energy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pos = segs == 1
                           ? 0.0
                           : static_cast<double>(i) / (n - 1) * (segs - 1);
    const size_t k = std::min(segs - 2, static_cast<size_t>(pos));
    const double frac = segs == 1 ? 0.0 : pos - k;
    const double f0 = segs == 1 ? spec.f0_trajectory_hz[0]
                                : spec.f0_trajectory_hz[k] * (1.0 - frac) +
                                      spec.f0_trajectory_hz[k + 1] * frac;
    double v = 0.0;
    for (int h = 0; h < spec.harmonic_count; ++h) {
      v += gains[h] * std::sin((h + 1) * fund_phase + phase0[h]);
    }
    if (spec.am_depth > 0.0) {
      const double am = 1.0 + spec.am_depth *
                                  std::sin(2.0 * M_PI * spec.am_rate_hz * i / sr +
                                           am_phase);
      v *= am / (1.0 + spec.am_depth);
    }
    harm[i] = v;
    harm_energy += v * v;
    fund_phase += 2.0 * M_PI * f0 / sr;
  }

  std::vector<double> out = harm;
  if (spec.floor_level_db > -200.0 && n > 1) {
    const double harm_rms =
        spec.harmonic_count > 0 ? std::sqrt(harm_energy / n) : 1.0;
    const double floor_rms =
        harm_rms * std::pow(10.0, spec.floor_level_db / 20.0);
    // One-pole lowpassed white noise, rescaled to the target RMS.
    std::vector<double> bb(n);
    double state = 0.0, e = 0.0;
    for (size_t i = 0; i < n; ++i) {
      state = 0.8 * state + 0.2 * rng.normal();
      bb[i] = state;
      e += state * state;
    }
    const double scale = floor_rms / std::sqrt(e / n + 1e-30);
    for (size_t i = 0; i < n; ++i) out[i] += scale * bb[i];
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  const double norm = peak > 0.0 ? 0.5 / peak : 0.0;
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(out[i] * norm);
  }
  return w;
}

// Shaped broadband pretraining noise: pink-ish spectrum plus a slowly
// modulated band of mid-frequency noise. Stands in for a generic noise
// corpus in the self-contained benchmark.
inline Waveform synth_generic_noise(uint64_t seed, double duration_s,
                                    int sr = kSampleRate) {
  require(duration_s > 0.0, "synth_generic_noise: duration must be positive");
  const size_t n = static_cast<size_t>(std::llround(duration_s * sr));
  Rng rng(seed);
  std::vector<double> out(n, 0.0);

  // Paul Kellet's economy pink filter.
  double b0 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double white = rng.normal();
    b0 = 0.99765 * b0 + white * 0.0990460;
    b1 = 0.96300 * b1 + white * 0.2965164;
    b2 = 0.57000 * b2 + white * 1.0526913;
    out[i] = (b0 + b1 + b2 + white * 0.1848) * 0.2;
  }

  // Babble-like component: band-passed noise with slow random amplitude
  // modulation (two-pole resonator around 500-1500 Hz).
  const double fc = rng.uniform(500.0, 1500.0);
  const double bw = 400.0;
  const double r = std::exp(-M_PI * bw / sr);
  const double theta = 2.0 * M_PI * fc / sr;
  const double a1 = -2.0 * r * std::cos(theta), a2 = r * r;
  const double mod_rate = rng.uniform(2.0, 5.0);
  const double mod_phase = rng.uniform(0.0, 2.0 * M_PI);
  double y1 = 0, y2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double y = rng.normal() - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    const double mod =
        0.5 * (1.0 + std::sin(2.0 * M_PI * mod_rate * i / sr + mod_phase));
    out[i] += 0.15 * (1.0 - r) * y * mod;
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  const double norm = peak > 0.0 ? 0.5 / peak : 0.0;
  Waveform w;
  w.sample_rate = sr;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(out[i] * norm);
  }
  return w;
}

// Synthetic speech-like clean source: a train of voiced syllables (pitched
// harmonic stacks under a formant envelope, with vibrato and glides) broken
// by unvoiced bursts and pauses. Not speech, but it has the modulation
// structure the metrics and the enhancement task care about.
inline Waveform synth_speech(uint64_t seed, double duration_s,
                             int sr = kSampleRate) {
  require(duration_s > 0.0, "synth_speech: duration must be positive");
  const size_t n = static_cast<size_t>(std::llround(duration_s * sr));
  Rng rng(seed);
  std::vector<double> out(n, 0.0);

  size_t pos = 0;
  while (pos < n) {
    const double syl_s = rng.uniform(0.12, 0.3);
    const size_t len = std::min(
        n - pos, static_cast<size_t>(std::llround(syl_s * sr)));
    if (len == 0) break;
    const double kind = rng.uniform();
    if (kind < 0.15) {
      // pause
    } else if (kind < 0.3) {
      // Unvoiced burst: first-difference of white noise (high-tilted).
      double prev = 0.0;
      for (size_t i = 0; i < len; ++i) {
        const double wN = rng.normal();
        const double env = std::sin(M_PI * static_cast<double>(i) / len);
        out[pos + i] = 0.12 * env * (wN - prev);
        prev = wN;
      }
    } else {
      // Voiced syllable.
      const double pitch_a = rng.uniform(100.0, 220.0);
      const double pitch_b = pitch_a * rng.uniform(0.85, 1.15);
      const double formants[3] = {rng.uniform(300.0, 800.0),
                                  rng.uniform(900.0, 2000.0),
                                  rng.uniform(2200.0, 3400.0)};
      const double bws[3] = {90.0, 120.0, 160.0};
      const int harmonics = static_cast<int>(3800.0 / std::max(pitch_a, pitch_b));
      std::vector<double> hgain(harmonics);
      for (int h = 0; h < harmonics; ++h) {
        const double f = (h + 1) * 0.5 * (pitch_a + pitch_b);
        double g = 0.0;
        for (int j = 0; j < 3; ++j) {
          const double d = (f - formants[j]) / bws[j];
          g += 1.0 / (1.0 + d * d);
        }
        hgain[h] = g / (1.0 + 0.3 * h);
      }
      const double vib_rate = rng.uniform(4.0, 7.0);
      const double vib_depth = rng.uniform(0.0, 0.02);
      double phase = rng.uniform(0.0, 2.0 * M_PI);
      for (size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / len;
        const double f0 =
            (pitch_a * (1.0 - t) + pitch_b * t) *
            (1.0 + vib_depth * std::sin(2.0 * M_PI * vib_rate * i / sr));
        double v = 0.0;
        for (int h = 0; h < harmonics; ++h) {
          v += hgain[h] * std::sin((h + 1) * phase);
        }
        const double env = std::pow(std::sin(M_PI * t), 0.6);
        out[pos + i] = 0.1 * env * v;
        phase += 2.0 * M_PI * f0 / sr;
      }
    }
    pos += len;
    // short inter-syllable gap
    pos += static_cast<size_t>(std::llround(rng.uniform(0.0, 0.05) * sr));
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  const double norm = peak > 0.0 ? 0.7 / peak : 0.0;
  Waveform w;
  w.sample_rate = sr;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(out[i] * norm);
  }
  return w;
}

}  // namespace dsenh

#endif
