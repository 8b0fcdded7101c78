#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "dsenh/dataset.hpp"
#include "dsenh/fft.hpp"
#include "dsenh/mixer.hpp"
#include "dsenh/synth.hpp"
#include "dsenh/wavio.hpp"

using namespace dsenh;
namespace fs = std::filesystem;

namespace {

Waveform tone(double freq, double amp, double seconds, int sr = kSampleRate) {
  Waveform w;
  w.sample_rate = sr;
  const size_t n = static_cast<size_t>(seconds * sr);
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(amp * std::sin(2.0 * M_PI * freq * i / sr));
  }
  return w;
}

// Hann-windowed power spectrum of the first 8192 samples.
std::vector<double> power_spectrum(const Waveform& w, size_t n = 8192) {
  REQUIRE(w.samples.size() >= n);
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    const double win = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
    x[i] = win * w.samples[i];
  }
  auto spec = rfft(x);
  std::vector<double> p(spec.size());
  for (size_t i = 0; i < spec.size(); ++i) p[i] = std::norm(spec[i]);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// mix_at_snr
// ---------------------------------------------------------------------------

TEST_CASE("snr 0 with equal energies gives unit gain") {
  auto s = tone(400, 0.3, 0.5);
  auto v = tone(700, 0.3, 0.5);
  auto rec = mix_at_snr(s, v, 0.0);
  CHECK(rec.applied_noise_gain == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("snr -15 with equal energies gives the closed-form gain") {
  auto s = tone(400, 0.3, 0.5);
  auto v = tone(700, 0.3, 0.5);
  auto rec = mix_at_snr(s, v, -15.0);
  CHECK(rec.applied_noise_gain ==
        doctest::Approx(std::pow(10.0, 0.75)).epsilon(1e-5));
}

TEST_CASE("realized SNR matches the request within 0.01 dB") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Waveform s, v;
    s.samples.resize(8000);
    v.samples.resize(8000);
    for (auto& x : s.samples) x = static_cast<float>(rng.uniform(-0.5, 0.5));
    for (auto& x : v.samples) x = static_cast<float>(rng.uniform(-0.5, 0.5));
    const double snr = rng.uniform(-25.0, -5.0);
    auto rec = mix_at_snr(s, v, snr);
    CHECK(std::abs(rec.measured_snr_db() - snr) < 0.01);
    // mixture == clean + gain * noise sample-exactly
    for (size_t i = 0; i < s.samples.size(); ++i) {
      const float expect =
          s.samples[i] +
          static_cast<float>(rec.applied_noise_gain) * v.samples[i];
      CHECK(rec.mixture.samples[i] == expect);
    }
  }
}

TEST_CASE("mixer rejects zero-energy inputs and length mismatch") {
  auto s = tone(400, 0.3, 0.5);
  Waveform silent;
  silent.samples.assign(s.samples.size(), 0.0f);
  CHECK_THROWS_AS(mix_at_snr(s, silent, 0.0), ValidationError);
  CHECK_THROWS_AS(mix_at_snr(silent, s, 0.0), ValidationError);
  auto shorter = tone(700, 0.3, 0.25);
  CHECK_THROWS_AS(mix_at_snr(s, shorter, 0.0), ValidationError);
}

// ---------------------------------------------------------------------------
// synth_drone_noise
// ---------------------------------------------------------------------------

TEST_CASE("no harmonics and no floor synthesizes silence") {
  NoiseSynthSpec spec;
  spec.harmonic_count = 0;
  spec.floor_level_db = -300.0;
  auto w = synth_drone_noise(spec, 0.25);
  for (float v : w.samples) CHECK(v == 0.0f);
}

TEST_CASE("constant-f0 harmonic stack concentrates energy at the harmonics") {
  NoiseSynthSpec spec;
  spec.f0_trajectory_hz = {100.0};
  spec.harmonic_count = 8;
  spec.harmonic_gains.assign(8, 1.0);
  spec.floor_level_db = -300.0;
  spec.seed = 5;
  auto w = synth_drone_noise(spec, 1.0);

  auto p = power_spectrum(w);
  const double bin_hz = static_cast<double>(kSampleRate) / 8192;
  double total = 0.0;
  for (double v : p) total += v;

  double near_peaks = 0.0;
  for (int h = 1; h <= 8; ++h) {
    const int center = static_cast<int>(std::lround(100.0 * h / bin_hz));
    // find the local peak near the nominal harmonic bin
    int peak = center;
    for (int k = center - 3; k <= center + 3; ++k) {
      if (p[k] > p[peak]) peak = k;
    }
    CHECK(std::abs(peak - center) <= 2);
    for (int k = peak - 2; k <= peak + 2; ++k) near_peaks += p[k];
  }
  CHECK(near_peaks > 0.99 * total);   // < 1% outside +-2 bins of the peaks
  CHECK(near_peaks > 0.90 * total);   // module invariant, looser form
}

TEST_CASE("synthesizer is deterministic per spec and seed") {
  NoiseSynthSpec spec;
  spec.f0_trajectory_hz = {90.0, 110.0};
  spec.am_depth = 0.4;
  spec.seed = 77;
  auto a = synth_drone_noise(spec, 0.5);
  auto b = synth_drone_noise(spec, 0.5);
  CHECK(a.samples == b.samples);
  spec.seed = 78;
  auto c = synth_drone_noise(spec, 0.5);
  CHECK(a.samples != c.samples);
}

TEST_CASE("harmonics above Nyquist are rejected") {
  NoiseSynthSpec spec;
  spec.f0_trajectory_hz = {500.0};
  spec.harmonic_count = 20;  // 10 kHz > 8 kHz
  CHECK_THROWS_AS(synth_drone_noise(spec, 0.1), ValidationError);
}

TEST_CASE("speech and generic noise generators are deterministic and live") {
  auto s1 = synth_speech(5, 2.0);
  auto s2 = synth_speech(5, 2.0);
  CHECK(s1.samples == s2.samples);
  CHECK(energy(s1) > 0.0);
  auto g1 = synth_generic_noise(6, 2.0);
  auto g2 = synth_generic_noise(6, 2.0);
  CHECK(g1.samples == g2.samples);
  CHECK(energy(g1) > 0.0);
}

// ---------------------------------------------------------------------------
// build_dataset
// ---------------------------------------------------------------------------

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / "dsenh_datagen_test";
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("build_dataset draws uniform SNRs with the documented statistics") {
  TempDir tmp;
  write_wav((tmp.dir / "c0.wav").string(), synth_speech(1, 3.0));
  write_wav((tmp.dir / "c1.wav").string(), synth_speech(2, 3.0));
  NoiseSynthSpec nspec;
  nspec.seed = 3;
  write_wav((tmp.dir / "n0.wav").string(), synth_drone_noise(nspec, 3.0));
  nspec.seed = 4;
  nspec.f0_trajectory_hz = {80.0, 120.0};
  write_wav((tmp.dir / "n1.wav").string(), synth_drone_noise(nspec, 3.0));

  std::string manifest_text;
  manifest_text += "# test manifest\n";
  manifest_text += "clean train - c0 " + (tmp.dir / "c0.wav").string() + "\n";
  manifest_text += "clean train - c1 " + (tmp.dir / "c1.wav").string() + "\n";
  manifest_text += "noise train constant n0 " + (tmp.dir / "n0.wav").string() + "\n";
  manifest_text += "noise train dynamic n1 " + (tmp.dir / "n1.wav").string() + "\n";
  DatasetManifest m = parse_manifest(manifest_text);

  DatasetCfg cfg;
  cfg.count = 1000;
  cfg.crop_s = 0.5;
  cfg.seed = 11;
  auto records = build_dataset(m, Split::Train, cfg);
  REQUIRE(records.size() == 1000);

  double mean = 0.0;
  for (const auto& r : records) {
    CHECK(std::abs(r.measured_snr_db() - r.target_snr_db) < 0.01);
    mean += r.target_snr_db;
  }
  mean /= static_cast<double>(records.size());
  CHECK(mean > -15.6);
  CHECK(mean < -14.4);

  // count == 0 -> empty
  DatasetCfg zero = cfg;
  zero.count = 0;
  CHECK(build_dataset(m, Split::Train, zero).empty());

  // same seed -> identical sequence
  auto again = build_dataset(m, Split::Train, cfg);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(records[i].mixture.samples == again[i].mixture.samples);
    CHECK(records[i].noise_id == again[i].noise_id);
  }
}

TEST_CASE("build_dataset skips short clips and errors when none usable") {
  TempDir tmp;
  write_wav((tmp.dir / "short.wav").string(), synth_speech(1, 0.2));
  write_wav((tmp.dir / "noise.wav").string(),
            synth_drone_noise(NoiseSynthSpec{}, 3.0));
  std::string text;
  text += "clean train - short " + (tmp.dir / "short.wav").string() + "\n";
  text += "noise train constant n " + (tmp.dir / "noise.wav").string() + "\n";
  DatasetManifest m = parse_manifest(text);
  DatasetCfg cfg;
  cfg.count = 3;
  cfg.crop_s = 1.0;
  CHECK_THROWS_AS(build_dataset(m, Split::Train, cfg), ValidationError);
}

TEST_CASE("manifest rejects a noise id shared across splits") {
  std::string text;
  text += "noise train constant nshared /tmp/a.wav\n";
  text += "noise test constant nshared /tmp/b.wav\n";
  CHECK_THROWS_AS(parse_manifest(text), ValidationError);
}

TEST_CASE("synthetic dataset is deterministic and respects its SNR range") {
  DatasetCfg cfg;
  cfg.seed = 21;
  cfg.crop_s = 1.0;
  SyntheticDataset ds(SyntheticNoiseKind::Drone, 8, cfg, 0xab);
  for (size_t i = 0; i < ds.size(); ++i) {
    auto rec = ds.get(i);
    CHECK(rec.target_snr_db >= -25.0);
    CHECK(rec.target_snr_db <= -5.0);
    CHECK(std::abs(rec.measured_snr_db() - rec.target_snr_db) < 0.01);
    auto rec2 = ds.get(i);
    CHECK(rec.mixture.samples == rec2.mixture.samples);
  }
}

// ---------------------------------------------------------------------------
// WAV io
// ---------------------------------------------------------------------------

TEST_CASE("wav PCM16 write/read round trip is byte identical") {
  TempDir tmp;
  const std::string p1 = (tmp.dir / "a.wav").string();
  const std::string p2 = (tmp.dir / "b.wav").string();
  auto w = synth_speech(9, 0.5);
  write_wav(p1, w);
  auto r = read_wav(p1);
  CHECK(r.sample_rate == kSampleRate);
  CHECK(r.samples.size() == w.samples.size());
  write_wav(p2, r);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::vector<char> c1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  std::vector<char> c2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
}

TEST_CASE("stereo wav reads first channel with length preserved") {
  TempDir tmp;
  const std::string path = (tmp.dir / "stereo.wav").string();
  // Hand-build a 2-channel PCM16 file: L = ramp, R = negated ramp.
  const int n = 100;
  std::vector<uint8_t> bytes;
  auto put32 = [&](uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes.push_back((v >> (8 * b)) & 0xff);
  };
  auto put16 = [&](uint16_t v) {
    bytes.push_back(v & 0xff);
    bytes.push_back((v >> 8) & 0xff);
  };
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  put32(36 + n * 4);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(16);
  put16(1);
  put16(2);  // stereo
  put32(16000);
  put32(16000 * 4);
  put16(4);
  put16(16);
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  put32(n * 4);
  for (int i = 0; i < n; ++i) {
    put16(static_cast<uint16_t>(static_cast<int16_t>(i * 100)));
    put16(static_cast<uint16_t>(static_cast<int16_t>(-i * 100)));
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();

  auto w = read_wav(path);
  REQUIRE(w.samples.size() == static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    CHECK(w.samples[i] == doctest::Approx(i * 100 / 32768.0).epsilon(1e-7));
  }
}

TEST_CASE("48 kHz input is resampled to 16 kHz with the tone preserved") {
  TempDir tmp;
  const std::string path = (tmp.dir / "hi.wav").string();
  write_wav(path, tone(440.0, 0.4, 1.0, 48000));
  auto w = read_wav(path);
  CHECK(w.sample_rate == kSampleRate);
  CHECK(w.samples.size() == doctest::Approx(16000.0).epsilon(0.01));

  auto p = power_spectrum(w);
  size_t peak = 0;
  for (size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[peak]) peak = k;
  }
  const double bin_hz = static_cast<double>(kSampleRate) / 8192;
  CHECK(std::abs(peak * bin_hz - 440.0) <= bin_hz);
}

TEST_CASE("malformed wav headers raise format errors") {
  TempDir tmp;
  const std::string path = (tmp.dir / "bad.wav").string();
  std::ofstream out(path, std::ios::binary);
  out << "this is not a wav file at all";
  out.close();
  CHECK_THROWS_AS(read_wav(path), FormatError);
  CHECK_THROWS_AS(read_wav((tmp.dir / "missing.wav").string()), FormatError);
}
