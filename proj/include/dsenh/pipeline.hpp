#ifndef DSENH_PIPELINE_HPP
#define DSENH_PIPELINE_HPP

#include <vector>

#include "dsenh/loss.hpp"
#include "dsenh/masking.hpp"
#include "dsenh/model.hpp"
#include "dsenh/stft.hpp"

namespace dsenh {

// Forward tape for one utterance through the enhancement data path
//   stft -> model_forward -> apply_mask -> istft
// DSP stages run in double; the network runs in its own scalar type.
template <typename T>
struct PipelineTape {
  typename ComplexMaskNet<T>::Workspace ws;
  Spectrogram<double> Y;
  size_t input_len = 0;
};

// Enhances `mixture` (raw samples at 16 kHz) and returns an estimate of the
// same length. When `tape` is non-null the intermediate state needed for
// backpropagation is recorded.
template <typename T>
std::vector<double> pipeline_forward(const ComplexMaskNet<T>& net,
                                     const ParameterStore<T>& store,
                                     const StftConfig& scfg,
                                     const std::vector<double>& mixture,
                                     ForwardMode mode,
                                     PipelineTape<T>* tape) {
  require(scfg.bins() == net.config().input_bins(),
          "pipeline: stft bin count does not match model config");
  Spectrogram<double> Y = stft_samples(mixture, scfg);
  Spectrogram<T> Yt = spectrogram_cast<T>(Y);

  typename ComplexMaskNet<T>::Workspace local_ws = net.make_workspace();
  typename ComplexMaskNet<T>::Workspace& ws = tape ? tape->ws : local_ws;
  if (tape) ws = net.make_workspace();
  ComplexMaskT<T> mask = net.forward(store, Yt, ws, mode);

  Spectrogram<double> Shat = apply_mask(spectrogram_cast<double>(mask), Y);
  std::vector<double> synth = istft_samples(Shat, scfg);
  std::vector<double> est = trim_padded(synth, mixture.size(), scfg);
  if (tape) {
    tape->Y = std::move(Y);
    tape->input_len = mixture.size();
  }
  return est;
}

// Backpropagates d loss / d estimate through the tape, accumulating model
// parameter gradients into the sink.
template <typename T>
void pipeline_backward(const ComplexMaskNet<T>& net,
                       const ParameterStore<T>& store, GradSink<T>& sink,
                       const StftConfig& scfg, PipelineTape<T>& tape,
                       const std::vector<double>& grad_estimate) {
  require(grad_estimate.size() == tape.input_len,
          "pipeline backward: gradient length mismatch");
  const int frames = tape.Y.frames;
  const size_t synth_len =
      static_cast<size_t>(frames - 1) * scfg.hop + scfg.fft_size;
  const size_t pad = static_cast<size_t>(scfg.fft_size) / 2;

  std::vector<double> g_synth(synth_len, 0.0);
  for (size_t i = 0; i < grad_estimate.size() && pad + i < synth_len; ++i) {
    g_synth[pad + i] = grad_estimate[i];
  }
  Spectrogram<double> g_shat = istft_adjoint(g_synth, frames, scfg);
  Spectrogram<double> g_mask = apply_mask_grad_mask(g_shat, tape.Y);
  ComplexMaskT<T> g_mask_t = spectrogram_cast<T>(g_mask);
  net.backward(store, sink, tape.ws, g_mask_t);
}

// Loss + gradient for one (mixture, clean) pair; the backbone of a training
// step and of the end-to-end gradient checks.
template <typename T>
double pipeline_loss(const ComplexMaskNet<T>& net,
                     const ParameterStore<T>& store, GradSink<T>* sink,
                     const StftConfig& scfg, const std::vector<double>& mixture,
                     const std::vector<double>& clean, ForwardMode mode) {
  PipelineTape<T> tape;
  std::vector<double> est =
      pipeline_forward(net, store, scfg, mixture, mode, sink ? &tape : nullptr);
  SiSnrResult<double> r = si_snr_loss(est, clean, sink != nullptr);
  if (sink) {
    pipeline_backward(net, store, *sink, scfg, tape, r.grad);
  }
  return r.loss;
}

}  // namespace dsenh

#endif
