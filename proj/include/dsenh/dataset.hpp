#ifndef DSENH_DATASET_HPP
#define DSENH_DATASET_HPP

#include <memory>
#include <string>
#include <vector>

#include "dsenh/manifest.hpp"
#include "dsenh/mixer.hpp"
#include "dsenh/rng.hpp"
#include "dsenh/synth.hpp"

namespace dsenh {

struct DatasetCfg {
  double snr_lo_db = -25.0;
  double snr_hi_db = -5.0;
  double crop_s = 2.0;
  size_t count = 0;
  uint64_t seed = 0;
};

// Source of clean/noise/mixture triples. get(i) must be a pure function of
// (dataset state, i) and safe to call from multiple threads.
class MixtureDataset {
 public:
  virtual ~MixtureDataset() = default;
  virtual size_t size() const = 0;
  virtual MixtureRecord get(size_t i) const = 0;
};

class InMemoryDataset : public MixtureDataset {
 public:
  explicit InMemoryDataset(std::vector<MixtureRecord> records)
      : records_(std::move(records)) {}
  size_t size() const override { return records_.size(); }
  MixtureRecord get(size_t i) const override { return records_.at(i); }

 private:
  std::vector<MixtureRecord> records_;
};

// Realizes the data recipe from ingested audio: random same-length crops of
// one clean and one noise clip, mixed at an SNR drawn uniformly from the
// configured range. Clips shorter than the crop are skipped with a warning
// on stderr. Record i draws from an RNG stream derived from (seed, i), so
// results do not depend on evaluation order.
std::vector<MixtureRecord> build_dataset(const DatasetManifest& manifest,
                                         Split split, const DatasetCfg& cfg);

// Fully synthetic dataset for the self-contained benchmark: clean side from
// the speech-like synthesizer, noise side either generic broadband
// (pretraining stage) or parametric rotor noise (adaptation stage).
enum class SyntheticNoiseKind { Generic, Drone };

class SyntheticDataset : public MixtureDataset {
 public:
  SyntheticDataset(SyntheticNoiseKind kind, size_t count, const DatasetCfg& cfg,
                   uint64_t stream_salt);

  size_t size() const override { return count_; }
  MixtureRecord get(size_t i) const override;

 private:
  SyntheticNoiseKind kind_;
  size_t count_;
  DatasetCfg cfg_;
  uint64_t salt_;
};

// Convenience constructors mirroring the protocol stages.
std::unique_ptr<SyntheticDataset> make_synthetic_dataset(
    SyntheticNoiseKind kind, double minutes, const DatasetCfg& cfg,
    uint64_t stream_salt);

}  // namespace dsenh

#endif
