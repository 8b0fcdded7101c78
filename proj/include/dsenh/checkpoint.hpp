#ifndef DSENH_CHECKPOINT_HPP
#define DSENH_CHECKPOINT_HPP

#include <string>

#include "dsenh/model.hpp"
#include "dsenh/optimizer.hpp"
#include "dsenh/rng.hpp"

namespace dsenh {

// Everything one training run owns: architecture, parameters, optimizer
// moments, sampler state and the global step.
struct ModelBundle {
  ModelConfig config;
  ParameterStore<float> store;
  ComplexMaskNet<float> net;
  Adam<float> optimizer;
  Rng rng;
  uint64_t training_step = 0;
};

// Fresh bundle with deterministic initialization. Adapters are inserted when
// cfg.adapter_flags has any flag set.
ModelBundle build_model(const ModelConfig& cfg, uint64_t init_seed);

// Binary checkpoint: magic, version, config JSON, parameter name/shape/offset
// table, float32 payload (native little-endian), optimizer state, RNG state,
// step counter. save -> load -> save is byte-identical.
void save_checkpoint(const ModelBundle& bundle, const std::string& path);

// Loads a checkpoint; when `expect` is given, a differing stored ModelConfig
// is a format error.
ModelBundle load_checkpoint(const std::string& path,
                            const ModelConfig* expect = nullptr);

}  // namespace dsenh

#endif
