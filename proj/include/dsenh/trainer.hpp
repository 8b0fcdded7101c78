#ifndef DSENH_TRAINER_HPP
#define DSENH_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "dsenh/dataset.hpp"
#include "dsenh/freeze.hpp"
#include "dsenh/optimizer.hpp"
#include "dsenh/pipeline.hpp"
#include "dsenh/threadpool.hpp"

namespace dsenh {

struct TrainHyperparams {
  int epochs = 2;
  int batch_size = 4;
  double lr = 1e-3;
  double grad_clip_norm = 5.0;  // <= 0 disables
  double input_rms = 0.05;      // mixtures are scaled to this RMS
  uint64_t seed = 0;
  int threads = 0;  // 0 => hardware concurrency
  size_t max_val_utterances = 8;
};

struct EpochStats {
  uint64_t step = 0;  // global step count at the end of the epoch
  double train_loss = 0.0;
  double val_sisnr = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;

  // Delimited text log: one `step train_loss val_sisnr` row per epoch.
  std::string to_log() const {
    std::ostringstream oss;
    oss << "step\ttrain_loss\tval_sisnr\n";
    for (const auto& e : epochs) {
      oss << e.step << "\t" << e.train_loss << "\t" << e.val_sisnr << "\n";
    }
    return oss.str();
  }
};

inline std::vector<double> scale_to_rms(const std::vector<float>& x,
                                        double target_rms) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  const double r = std::sqrt(e / std::max<size_t>(1, x.size()));
  const double g = r > 1e-12 ? target_rms / r : 1.0;
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = g * x[i];
  return out;
}

// Mean SI-SNR of enhanced validation mixtures under the current parameters.
template <typename T>
double validation_si_snr(const ComplexMaskNet<T>& net,
                         const ParameterStore<T>& store,
                         const StftConfig& scfg, const MixtureDataset& val,
                         const TrainHyperparams& hp, ForwardMode mode) {
  const size_t n = std::min(val.size(), hp.max_val_utterances);
  if (n == 0) return 0.0;
  std::vector<double> scores(n, 0.0);
  const int threads = hp.threads > 0 ? hp.threads : default_threads();
  parallel_for(static_cast<int>(n), threads, [&](int i) {
    MixtureRecord rec = val.get(static_cast<size_t>(i));
    std::vector<double> mix = scale_to_rms(rec.mixture.samples, hp.input_rms);
    std::vector<double> est =
        pipeline_forward(net, store, scfg, mix, mode, (PipelineTape<T>*)nullptr);
    std::vector<double> clean(rec.clean.samples.begin(),
                              rec.clean.samples.end());
    scores[i] = si_snr_metric(est, clean);
  });
  double sum = 0.0;
  for (double s : scores) sum += s;  // fixed order
  return sum / static_cast<double>(n);
}

// One optimization run under a freeze policy. Per step: sample a batch,
// run stft -> model -> mask -> istft per item, SI-SNR loss against the
// clean reference, backward, Adam update on the non-frozen parameters.
// Batch items are processed in parallel with per-item gradient buffers
// reduced in index order, so the result is independent of thread count.
template <typename T>
TrainHistory train(ComplexMaskNet<T>& net, ParameterStore<T>& store,
                   const StftConfig& scfg, const MixtureDataset& data,
                   const MixtureDataset* val, FreezePolicy policy,
                   const TrainHyperparams& hp, Adam<T>* optimizer,
                   ForwardMode mode = ForwardMode::WithAdapters) {
  require(data.size() > 0, "train: empty dataset");
  require(hp.batch_size >= 1, "train: batch size must be >= 1");
  apply_freeze_policy(store, policy);

  Adam<T> local_opt(AdamConfig{hp.lr, 0.9, 0.999, 1e-8});
  Adam<T>& opt = optimizer ? *optimizer : local_opt;
  opt.ensure_state(store);

  const int threads = hp.threads > 0 ? hp.threads : default_threads();
  const size_t steps_per_epoch =
      (data.size() + hp.batch_size - 1) / static_cast<size_t>(hp.batch_size);
  Rng sampler(hp.seed ^ 0x7261696eULL);

  TrainHistory history;
  uint64_t global_step = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (size_t s = 0; s < steps_per_epoch; ++s) {
      std::vector<size_t> batch(hp.batch_size);
      for (auto& b : batch) b = sampler.uniform_index(data.size());

      std::vector<std::vector<std::vector<T>>> local_grads(hp.batch_size);
      std::vector<double> losses(hp.batch_size, 0.0);
      parallel_for(hp.batch_size, threads, [&](int j) {
        GradSink<T> sink(store, local_grads[j]);
        MixtureRecord rec = data.get(batch[j]);
        std::vector<double> mix =
            scale_to_rms(rec.mixture.samples, hp.input_rms);
        std::vector<double> clean(rec.clean.samples.begin(),
                                  rec.clean.samples.end());
        losses[j] = pipeline_loss(net, store, &sink, scfg, mix, clean, mode);
      });

      double batch_loss = 0.0;
      for (double l : losses) batch_loss += l;
      batch_loss /= hp.batch_size;
      if (!std::isfinite(batch_loss)) {
        throw StateError("train: non-finite loss at step " +
                         std::to_string(global_step) + "; aborting");
      }

      store.zero_grad();
      const T inv_b = static_cast<T>(1.0 / hp.batch_size);
      for (int j = 0; j < hp.batch_size; ++j) {  // fixed reduction order
        for (int p = 0; p < store.count(); ++p) {
          auto& g = store.entry(p).grad;
          const std::vector<T>& lg = local_grads[j][p];
          for (size_t k = 0; k < g.size(); ++k) g[k] += lg[k] * inv_b;
        }
      }
      store.clear_frozen_grads();

      if (hp.grad_clip_norm > 0.0) {
        double norm2 = 0.0;
        for (int p = 0; p < store.count(); ++p) {
          const auto& e = store.entry(p);
          if (e.frozen) continue;
          for (T g : e.grad) norm2 += static_cast<double>(g) * g;
        }
        const double norm = std::sqrt(norm2);
        if (norm > hp.grad_clip_norm) {
          const T scale = static_cast<T>(hp.grad_clip_norm / norm);
          for (int p = 0; p < store.count(); ++p) {
            auto& e = store.entry(p);
            if (e.frozen) continue;
            for (T& g : e.grad) g *= scale;
          }
        }
      }

      opt.step(store);
      epoch_loss += batch_loss;
      ++global_step;
    }

    EpochStats st;
    st.step = global_step;
    st.train_loss = epoch_loss / static_cast<double>(steps_per_epoch);
    st.val_sisnr = val ? validation_si_snr(net, store, scfg, *val, hp, mode)
                       : 0.0;
    history.epochs.push_back(st);
  }
  return history;
}

}  // namespace dsenh

#endif
