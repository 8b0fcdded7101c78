#ifndef DSENH_MODEL_HPP
#define DSENH_MODEL_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsenh/layers.hpp"
#include "dsenh/masking.hpp"
#include "dsenh/rng.hpp"
#include "dsenh/stft.hpp"

namespace dsenh {

// ---------------------------------------------------------------------------
// Architecture description. The network operates on the first
// fft_size/2 bins (the Nyquist bin is dropped on input and its mask pinned
// to zero on output) so every level has an even frequency dimension.
// ---------------------------------------------------------------------------
struct ModelConfig {
  int fft_size = 512;
  std::vector<int> channels = {8, 16, 32, 32};  // encoder CR block outputs
  int fsmn_taps = 3;
  int enc_kf = 5, enc_kt = 2;
  int dec_kf = 3, dec_kt = 2;
  bool attention_gates = true;
  double leaky_slope = 0.2;
  std::vector<bool> adapter_flags;  // empty => no adapters inserted yet

  int blocks() const { return static_cast<int>(channels.size()); }
  int input_bins() const { return fft_size / 2 + 1; }
  int net_freq() const { return fft_size / 2; }

  // Frequency dimension at the output of encoder block b (0-based).
  int freq_at(int b) const { return net_freq() >> (b + 1); }

  void validate() const {
    require(fft_size > 0 && is_power_of_two(static_cast<size_t>(fft_size)),
            "model: fft_size must be a power of two");
    require(!channels.empty(), "model: need at least one encoder block");
    require(fsmn_taps >= 0, "model: negative FSMN taps");
    require(net_freq() % (1 << blocks()) == 0,
            "model: net frequency dim not divisible by 2^blocks");
    require(freq_at(blocks() - 1) >= 2, "model: too many blocks for fft size");
    require(adapter_flags.empty() ||
                static_cast<int>(adapter_flags.size()) == blocks(),
            "model: adapter flag count must equal encoder block count");
    require(enc_kt >= 1 && dec_kt >= 1, "model: time kernel must be >= 1");
    require(enc_kf >= 1 && dec_kf % 2 == 1,
            "model: decoder freq kernel must be odd");
  }

  bool operator==(const ModelConfig& o) const {
    return fft_size == o.fft_size && channels == o.channels &&
           fsmn_taps == o.fsmn_taps && enc_kf == o.enc_kf &&
           enc_kt == o.enc_kt && dec_kf == o.dec_kf && dec_kt == o.dec_kt &&
           attention_gates == o.attention_gates &&
           leaky_slope == o.leaky_slope && adapter_flags == o.adapter_flags;
  }
};

inline nlohmann::json model_config_to_json(const ModelConfig& c) {
  return nlohmann::json{{"fft_size", c.fft_size},
                        {"channels", c.channels},
                        {"fsmn_taps", c.fsmn_taps},
                        {"enc_kf", c.enc_kf},
                        {"enc_kt", c.enc_kt},
                        {"dec_kf", c.dec_kf},
                        {"dec_kt", c.dec_kt},
                        {"attention_gates", c.attention_gates},
                        {"leaky_slope", c.leaky_slope},
                        {"adapter_flags", c.adapter_flags}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.fft_size = j.at("fft_size").get<int>();
  c.channels = j.at("channels").get<std::vector<int>>();
  c.fsmn_taps = j.at("fsmn_taps").get<int>();
  c.enc_kf = j.at("enc_kf").get<int>();
  c.enc_kt = j.at("enc_kt").get<int>();
  c.dec_kf = j.at("dec_kf").get<int>();
  c.dec_kt = j.at("dec_kt").get<int>();
  c.attention_gates = j.at("attention_gates").get<bool>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.adapter_flags = j.at("adapter_flags").get<std::vector<bool>>();
  c.validate();
  return c;
}

// Parameter count added by one adapter at frequency dim F (two cells, each
// with down/up projections and biases).
inline size_t adapter_param_count(int freq) {
  const size_t f = static_cast<size_t>(freq);
  return 2 * (f * (f / 2) * 2 + f / 2 + f);
}

enum class ForwardMode { WithAdapters, WithoutAdapters };

// ---------------------------------------------------------------------------
// The mask-estimation network: a U-shaped stack of complex CR blocks
// (conv + FSMN) with stride-2 frequency downsampling, optional bottleneck
// adapters after each encoder block, attention-gated additive skips, and a
// conv-only upsampling decoder ending in a 1x1 complex projection to the
// mask.
// ---------------------------------------------------------------------------
template <typename T>
class ComplexMaskNet {
 public:
  ComplexMaskNet() = default;

  ComplexMaskNet(const ModelConfig& cfg, ParameterStore<T>& store) {
    cfg.validate();
    cfg_ = cfg;
    cfg_.adapter_flags.clear();  // adapters attach via insert_adapters
    const int B = cfg_.blocks();
    for (int b = 0; b < B; ++b) {
      ConvSpec cs;
      cs.cin = b == 0 ? 1 : cfg_.channels[b - 1];
      cs.cout = cfg_.channels[b];
      cs.kf = cfg_.enc_kf;
      cs.kt = cfg_.enc_kt;
      cs.stride_f = 2;
      cs.pad_f = (cfg_.enc_kf - 1) / 2;
      enc_conv_.emplace_back(store, "enc" + std::to_string(b) + ".conv",
                             ParamGroup::EncoderConv, cs);
      enc_fsmn_.emplace_back(store, "enc" + std::to_string(b) + ".fsmn",
                             ParamGroup::EncoderFsmn, cfg_.channels[b],
                             cfg_.freq_at(b), cfg_.fsmn_taps);
      if (cfg_.attention_gates) {
        gates_.emplace_back(store, "gate" + std::to_string(b),
                            cfg_.channels[b]);
      }
    }
    for (int i = 0; i < B; ++i) {
      ConvSpec cs;
      cs.cin = cfg_.channels[B - 1 - i];
      cs.cout = i < B - 1 ? cfg_.channels[B - 2 - i] : cfg_.channels[0];
      cs.kf = cfg_.dec_kf;
      cs.kt = cfg_.dec_kt;
      cs.stride_f = 1;
      cs.pad_f = (cfg_.dec_kf - 1) / 2;
      dec_conv_.emplace_back(store, "dec" + std::to_string(i) + ".conv",
                             ParamGroup::DecoderConv, cs);
    }
    ConvSpec out_cs;
    out_cs.cin = cfg_.channels[0];
    out_cs.cout = 1;
    out_cs.kf = 1;
    out_cs.kt = 1;
    out_cs.stride_f = 1;
    out_cs.pad_f = 0;
    out_conv_ = ComplexConv2d<T>(store, "mask.conv", ParamGroup::OutputConv,
                                 out_cs);
    act_ = SplitLeakyRelu<T>(static_cast<T>(cfg_.leaky_slope));
  }

  const ModelConfig& config() const { return cfg_; }

  bool has_adapter(int b) const {
    return b < static_cast<int>(adapters_.size()) && adapters_[b].has_value();
  }

  // Adds fresh adapters at the flagged encoder blocks. Down-projections are
  // drawn uniform(+-1/sqrt(F)); up-projections and biases start at zero so
  // the forward map is unchanged until training moves them.
  void insert_adapters(ParameterStore<T>& store, const std::vector<bool>& flags,
                       uint64_t seed) {
    require(static_cast<int>(flags.size()) == cfg_.blocks(),
            "insert_adapters: flag count must equal encoder block count");
    adapters_.resize(cfg_.blocks());
    for (int b = 0; b < cfg_.blocks(); ++b) {
      if (!flags[b]) continue;
      require(!adapters_[b].has_value(),
              "insert_adapters: block already has an adapter");
      adapters_[b].emplace(store, "adapter" + std::to_string(b),
                           cfg_.freq_at(b));
      Rng rng = Rng::derive(seed, 0xada9000ULL + b);
      const BottleneckAdapter<T>& ad = *adapters_[b];
      for (int cell = 0; cell < 2; ++cell) {
        const AdapterCell<T>& ac = cell == 0 ? ad.cell_r() : ad.cell_i();
        auto& w1 = store.entry(ac.w1()).value;
        const double bound = 1.0 / std::sqrt(static_cast<double>(ac.freq()));
        for (T& v : w1) v = static_cast<T>(rng.uniform(-bound, bound));
        // w2, b1, b2 stay zero.
      }
    }
    cfg_.adapter_flags = flags;
  }

  struct Workspace {
    std::vector<typename ComplexConv2d<T>::Act> enc_conv;
    std::vector<typename SplitLeakyRelu<T>::Act> enc_act;
    std::vector<typename Fsmn<T>::Act> enc_fsmn;
    std::vector<typename BottleneckAdapter<T>::Act> adapters;
    std::vector<typename AttentionGate<T>::Act> gates;
    std::vector<typename ComplexConv2d<T>::Act> dec_conv;
    std::vector<typename SplitLeakyRelu<T>::Act> dec_act;
    typename ComplexConv2d<T>::Act out_conv;
    ForwardMode mode = ForwardMode::WithAdapters;
    int frames = 0;
    bool ran_forward = false;
  };

  Workspace make_workspace() const {
    Workspace ws;
    const int B = cfg_.blocks();
    ws.enc_conv.resize(B);
    ws.enc_act.resize(B);
    ws.enc_fsmn.resize(B);
    ws.adapters.resize(B);
    ws.gates.resize(B);
    ws.dec_conv.resize(B);
    ws.dec_act.resize(B);
    return ws;
  }

  // Estimate the complex mask for a mixture spectrogram.
  ComplexMaskT<T> forward(const ParameterStore<T>& store,
                          const Spectrogram<T>& Y, Workspace& ws,
                          ForwardMode mode = ForwardMode::WithAdapters) const {
    require(Y.bins == cfg_.input_bins(),
            "model_forward: spectrogram bin count does not match config");
    const int B = cfg_.blocks();
    const int L = Y.frames;
    ws.mode = mode;
    ws.frames = L;

    // Drop the Nyquist bin into a 1-channel feature map.
    ComplexFeatureMap<T> x(1, cfg_.net_freq(), L);
    for (int l = 0; l < L; ++l) {
      const std::complex<T>* src = Y.frame(l);
      T* xr = x.re.row(0, l);
      T* xi = x.im.row(0, l);
      for (int f = 0; f < cfg_.net_freq(); ++f) {
        xr[f] = src[f].real();
        xi[f] = src[f].imag();
      }
    }

    std::vector<ComplexFeatureMap<T>> enc_out(B);
    for (int b = 0; b < B; ++b) {
      x = enc_conv_[b].forward(store, x, ws.enc_conv[b]);
      x = act_.forward(x, ws.enc_act[b]);
      x = enc_fsmn_[b].forward(store, x, ws.enc_fsmn[b]);
      if (mode == ForwardMode::WithAdapters && has_adapter(b)) {
        x = adapters_[b]->forward(store, x, ws.adapters[b]);
      }
      enc_out[b] = x;
    }

    auto gated = [&](int b) {
      if (cfg_.attention_gates) {
        return gates_[b].forward(store, enc_out[b], ws.gates[b]);
      }
      return enc_out[b];
    };

    ComplexFeatureMap<T> d = gated(B - 1);
    for (int i = 0; i < B; ++i) {
      if (i >= 1) {
        const ComplexFeatureMap<T> skip = gated(B - 1 - i);
        require(skip.same_shape(d), "model: skip/decoder shape mismatch");
        for (size_t n = 0; n < d.re.data.size(); ++n) {
          d.re.data[n] += skip.re.data[n];
          d.im.data[n] += skip.im.data[n];
        }
      }
      d = upsample_freq2(d);
      d = dec_conv_[i].forward(store, d, ws.dec_conv[i]);
      d = act_.forward(d, ws.dec_act[i]);
    }
    ComplexFeatureMap<T> m = out_conv_.forward(store, d, ws.out_conv);

    ComplexMaskT<T> mask(cfg_.input_bins(), L);
    for (int l = 0; l < L; ++l) {
      const T* mr = m.re.row(0, l);
      const T* mi = m.im.row(0, l);
      std::complex<T>* dst = mask.frame(l);
      for (int f = 0; f < cfg_.net_freq(); ++f) {
        dst[f] = std::complex<T>(mr[f], mi[f]);
      }
      dst[cfg_.net_freq()] = std::complex<T>(0, 0);  // Nyquist pinned
    }
    ws.ran_forward = true;
    return mask;
  }

  // Backpropagate a mask-space gradient through the recorded forward pass,
  // accumulating parameter gradients into the sink.
  void backward(const ParameterStore<T>& store, GradSink<T>& sink,
                Workspace& ws, const ComplexMaskT<T>& grad_mask) const {
    if (!ws.ran_forward) {
      throw StateError("model backward: no recorded forward pass");
    }
    require(grad_mask.bins == cfg_.input_bins() &&
                grad_mask.frames == ws.frames,
            "model backward: gradient grid mismatch");
    const int B = cfg_.blocks();
    const int L = ws.frames;

    ComplexFeatureMap<T> g(1, cfg_.net_freq(), L);
    for (int l = 0; l < L; ++l) {
      const std::complex<T>* src = grad_mask.frame(l);
      T* gr = g.re.row(0, l);
      T* gi = g.im.row(0, l);
      for (int f = 0; f < cfg_.net_freq(); ++f) {
        gr[f] = src[f].real();
        gi[f] = src[f].imag();
      }
    }

    ComplexFeatureMap<T> gd = out_conv_.backward(store, sink, ws.out_conv, g);
    std::vector<ComplexFeatureMap<T>> g_skip(B);  // gradient at gate outputs
    for (int i = B - 1; i >= 0; --i) {
      gd = act_.backward(ws.dec_act[i], gd);
      gd = dec_conv_[i].backward(store, sink, ws.dec_conv[i], gd);
      gd = upsample_freq2_adjoint(gd);
      if (i >= 1) {
        g_skip[B - 1 - i] = gd;  // additive skip: same gradient both ways
      } else {
        g_skip[B - 1] = gd;
      }
    }

    ComplexFeatureMap<T> g_chain;  // gradient arriving from block b+1's conv
    for (int b = B - 1; b >= 0; --b) {
      ComplexFeatureMap<T> ge;
      if (cfg_.attention_gates) {
        ge = gates_[b].backward(store, sink, ws.gates[b], g_skip[b]);
      } else {
        ge = g_skip[b];
      }
      if (b < B - 1) {
        for (size_t n = 0; n < ge.re.data.size(); ++n) {
          ge.re.data[n] += g_chain.re.data[n];
          ge.im.data[n] += g_chain.im.data[n];
        }
      }
      if (ws.mode == ForwardMode::WithAdapters && has_adapter(b)) {
        ge = adapters_[b]->backward(store, sink, ws.adapters[b], ge);
      }
      ge = enc_fsmn_[b].backward(store, sink, ws.enc_fsmn[b], ge);
      ge = act_.backward(ws.enc_act[b], ge);
      g_chain = enc_conv_[b].backward(store, sink, ws.enc_conv[b], ge);
    }
    ws.ran_forward = false;
  }

 private:
  ModelConfig cfg_;
  std::vector<ComplexConv2d<T>> enc_conv_;
  std::vector<Fsmn<T>> enc_fsmn_;
  std::vector<AttentionGate<T>> gates_;
  std::vector<std::optional<BottleneckAdapter<T>>> adapters_;
  std::vector<ComplexConv2d<T>> dec_conv_;
  ComplexConv2d<T> out_conv_;
  SplitLeakyRelu<T> act_;
};

// Deterministic parameter initialization for a freshly built model.
// Convolutions get fan-in scaled uniform weights, FSMN projections start at
// identity, gates start nearly open (bias 2), everything else at zero.
template <typename T>
void init_parameters(ParameterStore<T>& store, uint64_t seed) {
  for (int idx = 0; idx < store.count(); ++idx) {
    auto& e = store.entry(idx);
    Rng rng = Rng::derive(seed, 0x1000ULL + idx);
    const bool is_conv_w =
        (e.group == ParamGroup::EncoderConv ||
         e.group == ParamGroup::DecoderConv ||
         e.group == ParamGroup::OutputConv) &&
        e.shape.size() == 4;
    if (is_conv_w) {
      const double fan_in =
          static_cast<double>(e.shape[1]) * e.shape[2] * e.shape[3] * 2;
      const double bound = 1.0 / std::sqrt(fan_in);
      for (T& v : e.value) v = static_cast<T>(rng.uniform(-bound, bound));
    } else if (e.group == ParamGroup::EncoderFsmn && e.shape.size() == 3 &&
               e.shape[1] == e.shape[2]) {
      const int c = e.shape[0], f = e.shape[1];
      for (int ci = 0; ci < c; ++ci) {
        for (int d = 0; d < f; ++d) {
          e.value[(static_cast<size_t>(ci) * f + d) * f + d] = T(1);
        }
      }
    } else if (e.group == ParamGroup::AttentionGate && e.shape.size() == 1) {
      for (T& v : e.value) v = T(2);  // sigmoid(2) ~ 0.88: mostly-open skip
    }
    // Conv biases, FSMN bias/taps, gate weights stay zero.
  }
}

// Convenience wrapper matching the one-shot operation shape.
template <typename T>
ComplexMaskT<T> model_forward(const ComplexMaskNet<T>& net,
                              const ParameterStore<T>& store,
                              const Spectrogram<T>& Y,
                              ForwardMode mode = ForwardMode::WithAdapters) {
  typename ComplexMaskNet<T>::Workspace ws = net.make_workspace();
  return net.forward(store, Y, ws, mode);
}

template <typename To, typename From>
Spectrogram<To> spectrogram_cast(const Spectrogram<From>& s) {
  Spectrogram<To> out(s.bins, s.frames);
  for (size_t i = 0; i < s.data.size(); ++i) {
    out.data[i] = std::complex<To>(static_cast<To>(s.data[i].real()),
                                   static_cast<To>(s.data[i].imag()));
  }
  return out;
}

}  // namespace dsenh

#endif
