#include "dsenh/dataset.hpp"

#include <cmath>
#include <iostream>

#include "dsenh/wavio.hpp"

namespace dsenh {

namespace {

// Draw a crop with usable energy; silent stretches are redrawn a few times
// before giving up on the clip.
bool crop_with_energy(const Waveform& w, size_t crop_len, Rng& rng,
                      Waveform* out) {
  if (w.samples.size() < crop_len) return false;
  const size_t span = w.samples.size() - crop_len;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const size_t off = span == 0 ? 0 : rng.uniform_index(span + 1);
    double e = 0.0;
    for (size_t i = 0; i < crop_len; ++i) {
      const double v = w.samples[off + i];
      e += v * v;
    }
    if (e > 1e-8) {
      out->sample_rate = w.sample_rate;
      out->samples.assign(w.samples.begin() + off,
                          w.samples.begin() + off + crop_len);
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<MixtureRecord> build_dataset(const DatasetManifest& manifest,
                                         Split split, const DatasetCfg& cfg) {
  manifest.validate();
  require(cfg.crop_s > 0.0, "build_dataset: crop length must be positive");
  const size_t crop_len =
      static_cast<size_t>(std::llround(cfg.crop_s * kSampleRate));

  struct Clip {
    std::string id;
    Waveform audio;
  };
  std::vector<Clip> cleans, noises;
  for (const auto& e : manifest.select(ClipRole::Clean, split)) {
    Waveform w = read_wav(e.path);
    if (w.samples.size() < crop_len) {
      std::cerr << "build_dataset: skipping clean clip '" << e.id
                << "' shorter than the crop length\n";
      continue;
    }
    cleans.push_back({e.id, std::move(w)});
  }
  for (const auto& e : manifest.select(ClipRole::Noise, split)) {
    Waveform w = read_wav(e.path);
    if (w.samples.size() < crop_len) {
      std::cerr << "build_dataset: skipping noise clip '" << e.id
                << "' shorter than the crop length\n";
      continue;
    }
    noises.push_back({e.id, std::move(w)});
  }
  require(!cleans.empty(),
          "build_dataset: no usable clean clips for split " +
              std::string(split_name(split)));
  require(!noises.empty(),
          "build_dataset: no usable noise clips for split " +
              std::string(split_name(split)));

  std::vector<MixtureRecord> records;
  records.reserve(cfg.count);
  for (size_t i = 0; i < cfg.count; ++i) {
    Rng rng = Rng::derive(cfg.seed, i);
    const Clip& c = cleans[rng.uniform_index(cleans.size())];
    const Clip& v = noises[rng.uniform_index(noises.size())];
    Waveform cw, vw;
    if (!crop_with_energy(c.audio, crop_len, rng, &cw) ||
        !crop_with_energy(v.audio, crop_len, rng, &vw)) {
      std::cerr << "build_dataset: skipping record " << i
                << " (silent crops)\n";
      continue;
    }
    const double snr = rng.uniform(cfg.snr_lo_db, cfg.snr_hi_db);
    MixtureRecord rec = mix_at_snr(cw, vw, snr);
    rec.clean_id = c.id;
    rec.noise_id = v.id;
    records.push_back(std::move(rec));
  }
  return records;
}

SyntheticDataset::SyntheticDataset(SyntheticNoiseKind kind, size_t count,
                                   const DatasetCfg& cfg, uint64_t stream_salt)
    : kind_(kind), count_(count), cfg_(cfg), salt_(stream_salt) {
  require(cfg.crop_s > 0.0, "synthetic dataset: crop length must be positive");
}

MixtureRecord SyntheticDataset::get(size_t i) const {
  require(i < count_, "synthetic dataset: index out of range");
  Rng rng = Rng::derive(cfg_.seed ^ salt_, i);
  const double dur = cfg_.crop_s;

  // Clean side: synthesize a longer utterance and crop a live stretch.
  Waveform clean;
  for (int attempt = 0;; ++attempt) {
    const uint64_t sub = rng.next_u64();
    Waveform utt = synth_speech(sub, dur * 2.0);
    if (crop_with_energy(utt, static_cast<size_t>(std::llround(dur * kSampleRate)),
                         rng, &clean)) {
      break;
    }
    require(attempt < 16, "synthetic dataset: could not draw a live crop");
  }

  Waveform noise;
  std::string noise_id;
  if (kind_ == SyntheticNoiseKind::Generic) {
    noise = synth_generic_noise(rng.next_u64(), dur);
    noise_id = "synth-generic-" + std::to_string(i);
  } else {
    NoiseSynthSpec spec;
    const double f0 = rng.uniform(70.0, 130.0);
    const bool dynamic = rng.uniform() < 0.5;
    if (dynamic) {
      spec.f0_trajectory_hz = {f0, f0 * rng.uniform(0.8, 1.25)};
      spec.am_depth = rng.uniform(0.2, 0.5);
    } else {
      spec.f0_trajectory_hz = {f0};
      spec.am_depth = rng.uniform(0.0, 0.1);
    }
    const double f0_max =
        std::max(spec.f0_trajectory_hz.front(), spec.f0_trajectory_hz.back());
    spec.harmonic_count =
        std::min(40, static_cast<int>(7600.0 / f0_max));
    spec.floor_level_db = rng.uniform(-35.0, -25.0);
    spec.seed = rng.next_u64();
    noise = synth_drone_noise(spec, dur);
    noise_id = std::string("synth-drone-") + (dynamic ? "dyn-" : "const-") +
               std::to_string(i);
  }

  const double snr = rng.uniform(cfg_.snr_lo_db, cfg_.snr_hi_db);
  MixtureRecord rec = mix_at_snr(clean, noise, snr);
  rec.clean_id = "synth-speech-" + std::to_string(i);
  rec.noise_id = noise_id;
  return rec;
}

std::unique_ptr<SyntheticDataset> make_synthetic_dataset(
    SyntheticNoiseKind kind, double minutes, const DatasetCfg& cfg,
    uint64_t stream_salt) {
  require(minutes > 0.0, "synthetic dataset: minutes must be positive");
  const size_t count = static_cast<size_t>(
      std::llround(minutes * 60.0 / cfg.crop_s));
  return std::make_unique<SyntheticDataset>(kind, count, cfg, stream_salt);
}

}  // namespace dsenh
