#ifndef DSENH_MIXER_HPP
#define DSENH_MIXER_HPP

#include <cmath>
#include <string>

#include "dsenh/common.hpp"
#include "dsenh/waveform.hpp"

namespace dsenh {

// One clean/noise/mixture triple. mixture = clean + gain * noise holds
// sample-exactly, and the realized SNR matches target_snr_db to well under
// 0.01 dB (energies are accumulated in double).
struct MixtureRecord {
  Waveform clean;
  Waveform noise;
  Waveform mixture;
  double target_snr_db = 0.0;
  double applied_noise_gain = 1.0;
  std::string clean_id;
  std::string noise_id;

  double measured_snr_db() const {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < clean.samples.size(); ++i) {
      num += static_cast<double>(clean.samples[i]) * clean.samples[i];
    }
    for (size_t i = 0; i < noise.samples.size(); ++i) {
      const double g = applied_noise_gain * noise.samples[i];
      den += g * g;
    }
    return 10.0 * std::log10(num / den);
  }
};

// Scale the noise so that 10*log10(|s|^2 / |g v|^2) = snr_db and mix.
inline MixtureRecord mix_at_snr(const Waveform& s, const Waveform& v,
                                double snr_db) {
  require(s.size() == v.size(), "mix_at_snr: lengths differ (caller crops)");
  require(!s.empty(), "mix_at_snr: empty signals");
  const double es = energy(s);
  const double ev = energy(v);
  require(es > 0.0, "mix_at_snr: clean signal has zero energy");
  require(ev > 0.0, "mix_at_snr: noise signal has zero energy");

  const double gain = std::sqrt(es / (ev * std::pow(10.0, snr_db / 10.0)));
  // Round the gain to the float actually applied so the sample-exactness
  // invariant mixture == clean + applied_noise_gain * noise holds literally.
  const float g = static_cast<float>(gain);
  MixtureRecord rec;
  rec.clean = s;
  rec.noise = v;
  rec.target_snr_db = snr_db;
  rec.applied_noise_gain = static_cast<double>(g);
  rec.mixture.sample_rate = s.sample_rate;
  rec.mixture.samples.resize(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    rec.mixture.samples[i] = s.samples[i] + g * v.samples[i];
  }
  return rec;
}

}  // namespace dsenh

#endif
