#ifndef DSENH_LAYERS_HPP
#define DSENH_LAYERS_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "dsenh/gemm.hpp"
#include "dsenh/params.hpp"
#include "dsenh/tensor.hpp"

namespace dsenh {

// ---------------------------------------------------------------------------
// Complex 2-D convolution over (freq, time).
//
// out_r = W_r * x_r - W_i * x_i + b_r
// out_i = W_r * x_i + W_i * x_r + b_i
//
// Time padding is causal: frame l sees input frames l-kt+1 .. l only.
// Frequency supports stride 1 (same-size, kf odd, pad (kf-1)/2) and
// stride 2 (downsampling by two).
// ---------------------------------------------------------------------------

struct ConvSpec {
  int cin = 0, cout = 0;
  int kf = 3, kt = 2;
  int stride_f = 1;
  int pad_f = 1;

  int out_freq(int in_freq) const {
    return (in_freq + 2 * pad_f - kf) / stride_f + 1;
  }
};

template <typename T>
class ComplexConv2d {
 public:
  ComplexConv2d() = default;

  ComplexConv2d(ParameterStore<T>& store, const std::string& prefix,
                ParamGroup group, const ConvSpec& spec)
      : spec_(spec) {
    const std::vector<int> wshape = {spec.cout, spec.cin, spec.kf, spec.kt};
    w_r_ = store.add(prefix + ".w_r", group, wshape);
    w_i_ = store.add(prefix + ".w_i", group, wshape);
    b_r_ = store.add(prefix + ".b_r", group, {spec.cout});
    b_i_ = store.add(prefix + ".b_i", group, {spec.cout});
  }

  const ConvSpec& spec() const { return spec_; }

  struct Act {
    ComplexFeatureMap<T> input;
  };

  // Patches matrix for one plane: row (ci,i,j), column (l,fo), zero where
  // the kernel tap falls outside the input (causal time, frequency pad).
  void im2col(const Plane<T>& x, std::vector<T>& B) const {
    const int F = x.freq, L = x.frames;
    const int Fo = spec_.out_freq(F);
    const size_t N = static_cast<size_t>(L) * Fo;
    B.assign(static_cast<size_t>(spec_.cin) * spec_.kf * spec_.kt * N, T(0));
    for (int ci = 0; ci < spec_.cin; ++ci) {
      for (int i = 0; i < spec_.kf; ++i) {
        const int off = i - spec_.pad_f;
        int fo_lo = 0, fo_hi = Fo;
        while (fo_lo < Fo && fo_lo * spec_.stride_f + off < 0) ++fo_lo;
        while (fo_hi > fo_lo && (fo_hi - 1) * spec_.stride_f + off >= F) --fo_hi;
        for (int j = 0; j < spec_.kt; ++j) {
          const int dl = j - (spec_.kt - 1);  // <= 0, causal
          T* brow = B.data() +
                    ((static_cast<size_t>(ci) * spec_.kf + i) * spec_.kt + j) * N;
          for (int l = std::max(0, -dl); l < L; ++l) {
            const T* __restrict__ src = x.row(ci, l + dl) + off;
            T* __restrict__ dst = brow + static_cast<size_t>(l) * Fo;
            if (spec_.stride_f == 1) {
#pragma omp simd
              for (int fo = fo_lo; fo < fo_hi; ++fo) dst[fo] = src[fo];
            } else {
#pragma omp simd
              for (int fo = fo_lo; fo < fo_hi; ++fo) {
                dst[fo] = src[fo * spec_.stride_f];
              }
            }
          }
        }
      }
    }
  }

  // Adjoint of im2col: scatter-add patch gradients back onto the plane.
  void col2im_acc(const std::vector<T>& B, Plane<T>& gx) const {
    const int F = gx.freq, L = gx.frames;
    const int Fo = spec_.out_freq(F);
    const size_t N = static_cast<size_t>(L) * Fo;
    for (int ci = 0; ci < spec_.cin; ++ci) {
      for (int i = 0; i < spec_.kf; ++i) {
        const int off = i - spec_.pad_f;
        int fo_lo = 0, fo_hi = Fo;
        while (fo_lo < Fo && fo_lo * spec_.stride_f + off < 0) ++fo_lo;
        while (fo_hi > fo_lo && (fo_hi - 1) * spec_.stride_f + off >= F) --fo_hi;
        for (int j = 0; j < spec_.kt; ++j) {
          const int dl = j - (spec_.kt - 1);
          const T* brow = B.data() +
                          ((static_cast<size_t>(ci) * spec_.kf + i) * spec_.kt +
                           j) * N;
          for (int l = std::max(0, -dl); l < L; ++l) {
            T* __restrict__ dst = gx.row(ci, l + dl) + off;
            const T* __restrict__ src = brow + static_cast<size_t>(l) * Fo;
            if (spec_.stride_f == 1) {
#pragma omp simd
              for (int fo = fo_lo; fo < fo_hi; ++fo) dst[fo] += src[fo];
            } else {
#pragma omp simd
              for (int fo = fo_lo; fo < fo_hi; ++fo) {
                dst[fo * spec_.stride_f] += src[fo];
              }
            }
          }
        }
      }
    }
  }

  ComplexFeatureMap<T> forward(const ParameterStore<T>& store,
                               const ComplexFeatureMap<T>& x, Act& act) const {
    require(x.channels() == spec_.cin, "complex_conv: channel count mismatch");
    const int F = x.freq(), L = x.frames();
    const int Fo = spec_.out_freq(F);
    require(Fo > 0, "complex_conv: output frequency dim collapsed");
    act.input = x;
    const int K = spec_.cin * spec_.kf * spec_.kt;
    const int N = L * Fo;

    ComplexFeatureMap<T> out(spec_.cout, Fo, L);
    const T* br = store.value(b_r_);
    const T* bi = store.value(b_i_);
    for (int co = 0; co < spec_.cout; ++co) {
      T* orow = out.re.row(co, 0);
      T* oirow = out.im.row(co, 0);
      for (int n = 0; n < N; ++n) {
        orow[n] = br[co];
        oirow[n] = bi[co];
      }
    }

    std::vector<T> Br, Bi;
    im2col(x.re, Br);
    im2col(x.im, Bi);
    const T* Wr = store.value(w_r_);
    const T* Wi = store.value(w_i_);

    // Stack [Wr; Wi] so each patch matrix is streamed once:
    //   [Wr; Wi] . Br = [Wr.Br ; Wi.Br],  [Wr; Wi] . Bi = [Wr.Bi ; Wi.Bi]
    // then combine per the complex product.
    const size_t wsz = static_cast<size_t>(spec_.cout) * K;
    std::vector<T> Wstack(2 * wsz);
    std::copy(Wr, Wr + wsz, Wstack.begin());
    std::copy(Wi, Wi + wsz, Wstack.begin() + wsz);
    std::vector<T> Pr(2 * static_cast<size_t>(spec_.cout) * N, T(0));
    std::vector<T> Pi(2 * static_cast<size_t>(spec_.cout) * N, T(0));
    detail::gemm_acc(2 * spec_.cout, N, K, Wstack.data(), K, Br.data(), N,
                     Pr.data(), N);
    detail::gemm_acc(2 * spec_.cout, N, K, Wstack.data(), K, Bi.data(), N,
                     Pi.data(), N);
    const size_t plane = static_cast<size_t>(spec_.cout) * N;
    T* __restrict__ o_r = out.re.data.data();
    T* __restrict__ o_i = out.im.data.data();
    const T* __restrict__ wr_br = Pr.data();
    const T* __restrict__ wi_br = Pr.data() + plane;
    const T* __restrict__ wr_bi = Pi.data();
    const T* __restrict__ wi_bi = Pi.data() + plane;
#pragma omp simd
    for (size_t n = 0; n < plane; ++n) {
      o_r[n] += wr_br[n] - wi_bi[n];
      o_i[n] += wr_bi[n] + wi_br[n];
    }
    return out;
  }

  ComplexFeatureMap<T> backward(const ParameterStore<T>& store,
                                GradSink<T>& sink, const Act& act,
                                const ComplexFeatureMap<T>& gout) const {
    const ComplexFeatureMap<T>& x = act.input;
    const int F = x.freq(), L = x.frames();
    const int Fo = spec_.out_freq(F);
    require(gout.channels() == spec_.cout && gout.freq() == Fo &&
                gout.frames() == L,
            "complex_conv backward: gradient shape mismatch");
    const int K = spec_.cin * spec_.kf * spec_.kt;
    const int N = L * Fo;
    const T* Wr = store.value(w_r_);
    const T* Wi = store.value(w_i_);
    const T* Gr = gout.re.data.data();  // co x N, row-major
    const T* Gi = gout.im.data.data();
    const bool want_w = sink.wants(w_r_);

    if (want_w) {
      T* gbr = sink.grad(b_r_);
      T* gbi = sink.grad(b_i_);
      for (int co = 0; co < spec_.cout; ++co) {
        const T* __restrict__ gr = Gr + static_cast<size_t>(co) * N;
        const T* __restrict__ gi = Gi + static_cast<size_t>(co) * N;
        T sr = 0, si = 0;
#pragma omp simd reduction(+ : sr, si)
        for (int n = 0; n < N; ++n) {
          sr += gr[n];
          si += gi[n];
        }
        gbr[co] += sr;
        gbi[co] += si;
      }

      std::vector<T> Br, Bi;
      im2col(x.re, Br);
      im2col(x.im, Bi);
      // gWr += Gr.Br^T + Gi.Bi^T ; gWi += Gi.Br^T - Gr.Bi^T
      T* gWr = sink.grad(w_r_);
      T* gWi = sink.grad(w_i_);
      detail::gemm_abt_acc(spec_.cout, K, N, Gr, N, Br.data(), N, gWr, K);
      detail::gemm_abt_acc(spec_.cout, K, N, Gi, N, Bi.data(), N, gWr, K);
      detail::gemm_abt_acc(spec_.cout, K, N, Gi, N, Br.data(), N, gWi, K);
      std::vector<T> Gr_neg(static_cast<size_t>(spec_.cout) * N);
      for (size_t i = 0; i < Gr_neg.size(); ++i) Gr_neg[i] = -Gr[i];
      detail::gemm_abt_acc(spec_.cout, K, N, Gr_neg.data(), N, Bi.data(), N,
                           gWi, K);
    }

    // gBr = Wr^T.Gr + Wi^T.Gi ; gBi = Wr^T.Gi - Wi^T.Gr, then col2im.
    std::vector<T> Wrt(static_cast<size_t>(K) * spec_.cout);
    std::vector<T> Wit(static_cast<size_t>(K) * spec_.cout);
    std::vector<T> Wit_neg(static_cast<size_t>(K) * spec_.cout);
    for (int co = 0; co < spec_.cout; ++co) {
      for (int k = 0; k < K; ++k) {
        const T wr = Wr[static_cast<size_t>(co) * K + k];
        const T wi = Wi[static_cast<size_t>(co) * K + k];
        Wrt[static_cast<size_t>(k) * spec_.cout + co] = wr;
        Wit[static_cast<size_t>(k) * spec_.cout + co] = wi;
        Wit_neg[static_cast<size_t>(k) * spec_.cout + co] = -wi;
      }
    }
    std::vector<T> gB(static_cast<size_t>(K) * N, T(0));
    ComplexFeatureMap<T> gin(spec_.cin, F, L);
    detail::gemm_acc(K, N, spec_.cout, Wrt.data(), spec_.cout, Gr, N,
                     gB.data(), N);
    detail::gemm_acc(K, N, spec_.cout, Wit.data(), spec_.cout, Gi, N,
                     gB.data(), N);
    col2im_acc(gB, gin.re);
    std::fill(gB.begin(), gB.end(), T(0));
    detail::gemm_acc(K, N, spec_.cout, Wrt.data(), spec_.cout, Gi, N,
                     gB.data(), N);
    detail::gemm_acc(K, N, spec_.cout, Wit_neg.data(), spec_.cout, Gr, N,
                     gB.data(), N);
    col2im_acc(gB, gin.im);
    return gin;
  }

  int w_r() const { return w_r_; }
  int w_i() const { return w_i_; }
  int b_r() const { return b_r_; }
  int b_i() const { return b_i_; }

 private:
  ConvSpec spec_;
  int w_r_ = -1, w_i_ = -1, b_r_ = -1, b_i_ = -1;
};

// ---------------------------------------------------------------------------
// Leaky ReLU applied independently to the real and imaginary planes.
// ---------------------------------------------------------------------------

template <typename T>
class SplitLeakyRelu {
 public:
  explicit SplitLeakyRelu(T slope = T(0.2)) : slope_(slope) {}

  struct Act {
    ComplexFeatureMap<T> input;
  };

  ComplexFeatureMap<T> forward(const ComplexFeatureMap<T>& x, Act& act) const {
    act.input = x;
    ComplexFeatureMap<T> out = x;
    for (T& v : out.re.data) v = v > T(0) ? v : slope_ * v;
    for (T& v : out.im.data) v = v > T(0) ? v : slope_ * v;
    return out;
  }

  ComplexFeatureMap<T> backward(const Act& act,
                                const ComplexFeatureMap<T>& gout) const {
    ComplexFeatureMap<T> gin = gout;
    for (size_t i = 0; i < gin.re.data.size(); ++i) {
      if (act.input.re.data[i] <= T(0)) gin.re.data[i] *= slope_;
    }
    for (size_t i = 0; i < gin.im.data.size(); ++i) {
      if (act.input.im.data[i] <= T(0)) gin.im.data[i] *= slope_;
    }
    return gin;
  }

 private:
  T slope_;
};

// ---------------------------------------------------------------------------
// FSMN layer: frame-wise per-channel frequency projection plus learnable
// causal memory taps over the previous N frames,
//
//   out[c,:,l] = P_c x[c,:,l] + b_c + sum_{tau=1..N} a[c,:,tau] . x[c,:,l-tau]
//
// applied with shared (real) parameters to both planes. Missing past frames
// are treated as zero, so the layer is strictly causal.
// ---------------------------------------------------------------------------

template <typename T>
class Fsmn {
 public:
  Fsmn() = default;

  Fsmn(ParameterStore<T>& store, const std::string& prefix, ParamGroup group,
       int channels, int freq, int taps)
      : channels_(channels), freq_(freq), taps_(taps) {
    proj_ = store.add(prefix + ".proj", group, {channels, freq, freq});
    bias_ = store.add(prefix + ".bias", group, {channels, freq});
    if (taps > 0) {
      taps_idx_ = store.add(prefix + ".taps", group, {channels, freq, taps});
    }
  }

  int channels() const { return channels_; }
  int freq() const { return freq_; }
  int taps() const { return taps_; }

  struct Act {
    ComplexFeatureMap<T> input;
  };

  ComplexFeatureMap<T> forward(const ParameterStore<T>& store,
                               const ComplexFeatureMap<T>& x, Act& act) const {
    require(x.channels() == channels_ && x.freq() == freq_,
            "fsmn: input shape mismatch");
    act.input = x;
    const int L = x.frames();
    ComplexFeatureMap<T> out(channels_, freq_, L);
    const T* P = store.value(proj_);
    const T* B = store.value(bias_);
    const T* A = taps_ > 0 ? store.value(taps_idx_) : nullptr;

    // Per channel, the frame-wise projection is one (L x F).P^T GEMM on the
    // contiguous channel block; the memory taps are cheap axpy passes.
    for (int c = 0; c < channels_; ++c) {
      const T* Pc = P + static_cast<size_t>(c) * freq_ * freq_;
      const T* bc = B + static_cast<size_t>(c) * freq_;
      for (const bool imag : {false, true}) {
        const Plane<T>& xp = imag ? x.im : x.re;
        Plane<T>& op = imag ? out.im : out.re;
        for (int l = 0; l < L; ++l) {
          T* __restrict__ orow = op.row(c, l);
          for (int f = 0; f < freq_; ++f) orow[f] = bc[f];
        }
        detail::gemm_abt_acc(L, freq_, freq_, xp.row(c, 0), freq_, Pc, freq_,
                             op.row(c, 0), freq_);
        for (int l = 0; l < L; ++l) {
          T* __restrict__ orow = op.row(c, l);
          for (int tau = 1; tau <= taps_ && tau <= l; ++tau) {
            const T* __restrict__ arow =
                A + (static_cast<size_t>(c) * freq_) * taps_;
            const T* __restrict__ xpast = xp.row(c, l - tau);
#pragma omp simd
            for (int f = 0; f < freq_; ++f) {
              orow[f] += arow[static_cast<size_t>(f) * taps_ + (tau - 1)] * xpast[f];
            }
          }
        }
      }
    }
    return out;
  }

  ComplexFeatureMap<T> backward(const ParameterStore<T>& store,
                                GradSink<T>& sink, const Act& act,
                                const ComplexFeatureMap<T>& gout) const {
    const ComplexFeatureMap<T>& x = act.input;
    require(gout.same_shape(x), "fsmn backward: gradient shape mismatch");
    const int L = x.frames();
    const bool want_w = sink.wants(proj_);
    ComplexFeatureMap<T> gin(channels_, freq_, L);
    const T* P = store.value(proj_);
    T* gP = want_w ? sink.grad(proj_) : nullptr;
    T* gB = want_w ? sink.grad(bias_) : nullptr;
    const T* A = taps_ > 0 ? store.value(taps_idx_) : nullptr;
    T* gA = (taps_ > 0 && want_w) ? sink.grad(taps_idx_) : nullptr;

    std::vector<T> Gt;
    for (int c = 0; c < channels_; ++c) {
      const T* Pc = P + static_cast<size_t>(c) * freq_ * freq_;
      T* gPc = want_w ? gP + static_cast<size_t>(c) * freq_ * freq_ : nullptr;
      T* gbc = want_w ? gB + static_cast<size_t>(c) * freq_ : nullptr;
      for (const bool imag : {false, true}) {
        const Plane<T>& xp = imag ? x.im : x.re;
        const Plane<T>& gp = imag ? gout.im : gout.re;
        Plane<T>& gxp = imag ? gin.im : gin.re;
        // gx += G . P (rows are frames).
        detail::gemm_acc(L, freq_, freq_, gp.row(c, 0), freq_, Pc, freq_,
                         gxp.row(c, 0), freq_);
        if (want_w) {
          // gP += G^T . X and column sums for the bias.
          Gt.assign(static_cast<size_t>(freq_) * L, T(0));
          const T* G0 = gp.row(c, 0);
          for (int l = 0; l < L; ++l) {
            for (int f = 0; f < freq_; ++f) {
              Gt[static_cast<size_t>(f) * L + l] =
                  G0[static_cast<size_t>(l) * freq_ + f];
            }
          }
          detail::gemm_acc(freq_, freq_, L, Gt.data(), L, xp.row(c, 0), freq_,
                           gPc, freq_);
          for (int l = 0; l < L; ++l) {
            const T* __restrict__ grow = gp.row(c, l);
#pragma omp simd
            for (int f = 0; f < freq_; ++f) gbc[f] += grow[f];
          }
        }
        for (int l = 0; l < L; ++l) {
          const T* __restrict__ grow = gp.row(c, l);
          for (int tau = 1; tau <= taps_ && tau <= l; ++tau) {
            const T* __restrict__ arow =
                A + (static_cast<size_t>(c) * freq_) * taps_;
            const T* __restrict__ xpast = xp.row(c, l - tau);
            T* __restrict__ gxpast = gxp.row(c, l - tau);
            for (int f = 0; f < freq_; ++f) {
              const size_t ai = static_cast<size_t>(f) * taps_ + (tau - 1);
              gxpast[f] += arow[ai] * grow[f];
            }
            if (want_w) {
              T* __restrict__ garow = gA + (static_cast<size_t>(c) * freq_) * taps_;
              for (int f = 0; f < freq_; ++f) {
                const size_t ai = static_cast<size_t>(f) * taps_ + (tau - 1);
                garow[ai] += xpast[f] * grow[f];
              }
            }
          }
        }
      }
    }
    return gin;
  }

  int proj_idx() const { return proj_; }
  int bias_idx() const { return bias_; }
  int taps_param_idx() const { return taps_idx_; }

 private:
  int channels_ = 0, freq_ = 0, taps_ = 0;
  int proj_ = -1, bias_ = -1, taps_idx_ = -1;
};

// ---------------------------------------------------------------------------
// Bottleneck adapter (frequency domain).
//
// Each real cell projects the frequency axis down to F/2, applies ReLU and
// projects back:  h = relu(W1 u + b1), u' = W2 h + b2. Two cells are
// combined by the complex product pattern and wrapped in a skip connection:
//
//   delta_r = cell_r(A_r) - cell_i(A_i)
//   delta_i = cell_r(A_i) + cell_i(A_r)
//   out     = in + delta
//
// W2 and b2 start at zero, so a fresh adapter is an exact identity.
// ---------------------------------------------------------------------------

template <typename T>
class AdapterCell {
 public:
  AdapterCell() = default;

  AdapterCell(ParameterStore<T>& store, const std::string& prefix, int freq)
      : freq_(freq), hidden_(freq / 2) {
    require(freq % 2 == 0, "adapter: frequency dim must be even");
    w1_ = store.add(prefix + ".w1", ParamGroup::Adapter, {hidden_, freq});
    b1_ = store.add(prefix + ".b1", ParamGroup::Adapter, {hidden_});
    w2_ = store.add(prefix + ".w2", ParamGroup::Adapter, {freq, hidden_});
    b2_ = store.add(prefix + ".b2", ParamGroup::Adapter, {freq});
  }

  int freq() const { return freq_; }
  int hidden() const { return hidden_; }

  struct Act {
    Plane<T> input;   // C x F x L
    Plane<T> hidden;  // C x F/2 x L, post-ReLU
  };

  // The (c, l, f) layout makes each plane a contiguous (C*L) x F matrix, so
  // both projections run as single GEMMs over all (channel, frame) rows.
  Plane<T> forward(const ParameterStore<T>& store, const Plane<T>& u,
                   Act& act) const {
    require(u.freq == freq_, "adapter cell: frequency dim mismatch");
    const int C = u.channels, L = u.frames;
    const int M = C * L;
    act.input = u;
    act.hidden = Plane<T>(C, hidden_, L);
    Plane<T> out(C, freq_, L);
    const T* W1 = store.value(w1_);
    const T* B1 = store.value(b1_);
    const T* W2 = store.value(w2_);
    const T* B2 = store.value(b2_);

    T* H = act.hidden.data.data();
    for (int m = 0; m < M; ++m) {
      T* __restrict__ hrow = H + static_cast<size_t>(m) * hidden_;
      for (int k = 0; k < hidden_; ++k) hrow[k] = B1[k];
    }
    detail::gemm_abt_acc(M, hidden_, freq_, u.data.data(), freq_, W1, freq_,
                         H, hidden_);
    for (size_t i = 0; i < act.hidden.data.size(); ++i) {
      if (H[i] < T(0)) H[i] = T(0);
    }

    T* O = out.data.data();
    for (int m = 0; m < M; ++m) {
      T* __restrict__ orow = O + static_cast<size_t>(m) * freq_;
      for (int f = 0; f < freq_; ++f) orow[f] = B2[f];
    }
    detail::gemm_abt_acc(M, freq_, hidden_, H, hidden_, W2, hidden_, O, freq_);
    return out;
  }

  Plane<T> backward(const ParameterStore<T>& store, GradSink<T>& sink,
                    const Act& act, const Plane<T>& gout) const {
    const int C = act.input.channels, L = act.input.frames;
    require(gout.freq == freq_, "adapter cell backward: shape mismatch");
    const int M = C * L;
    const T* W1 = store.value(w1_);
    const T* W2 = store.value(w2_);
    const T* U = act.input.data.data();
    const T* H = act.hidden.data.data();
    const T* G = gout.data.data();
    const bool want_w = sink.wants(w1_);

    // gH = (G . W2) gated by the ReLU mask.
    Plane<T> gh(C, hidden_, L);
    detail::gemm_acc(M, hidden_, freq_, G, freq_, W2, hidden_,
                     gh.data.data(), hidden_);
    for (size_t i = 0; i < gh.data.size(); ++i) {
      if (H[i] <= T(0)) gh.data[i] = T(0);
    }

    if (want_w) {
      T* gB1 = sink.grad(b1_);
      T* gB2 = sink.grad(b2_);
      for (int m = 0; m < M; ++m) {
        const T* __restrict__ grow = G + static_cast<size_t>(m) * freq_;
#pragma omp simd
        for (int f = 0; f < freq_; ++f) gB2[f] += grow[f];
        const T* __restrict__ ghrow =
            gh.data.data() + static_cast<size_t>(m) * hidden_;
#pragma omp simd
        for (int k = 0; k < hidden_; ++k) gB1[k] += ghrow[k];
      }
      // gW2 += G^T.H and gW1 += gH^T.U via explicit transposes.
      std::vector<T> Gt(static_cast<size_t>(freq_) * M);
      for (int m = 0; m < M; ++m) {
        for (int f = 0; f < freq_; ++f) {
          Gt[static_cast<size_t>(f) * M + m] =
              G[static_cast<size_t>(m) * freq_ + f];
        }
      }
      detail::gemm_acc(freq_, hidden_, M, Gt.data(), M, H, hidden_,
                       sink.grad(w2_), hidden_);
      std::vector<T> gHt(static_cast<size_t>(hidden_) * M);
      for (int m = 0; m < M; ++m) {
        for (int k = 0; k < hidden_; ++k) {
          gHt[static_cast<size_t>(k) * M + m] =
              gh.data[static_cast<size_t>(m) * hidden_ + k];
        }
      }
      detail::gemm_acc(hidden_, freq_, M, gHt.data(), M, U, freq_,
                       sink.grad(w1_), freq_);
    }

    // gU = gH . W1.
    Plane<T> gin(C, freq_, L);
    detail::gemm_acc(M, freq_, hidden_, gh.data.data(), hidden_, W1, freq_,
                     gin.data.data(), freq_);
    return gin;
  }

  int w1() const { return w1_; }
  int b1() const { return b1_; }
  int w2() const { return w2_; }
  int b2() const { return b2_; }

 private:
  int freq_ = 0, hidden_ = 0;
  int w1_ = -1, b1_ = -1, w2_ = -1, b2_ = -1;
};

template <typename T>
class BottleneckAdapter {
 public:
  BottleneckAdapter() = default;

  BottleneckAdapter(ParameterStore<T>& store, const std::string& prefix,
                    int freq)
      : cell_r_(store, prefix + ".cell_r", freq),
        cell_i_(store, prefix + ".cell_i", freq) {}

  int freq() const { return cell_r_.freq(); }
  const AdapterCell<T>& cell_r() const { return cell_r_; }
  const AdapterCell<T>& cell_i() const { return cell_i_; }

  struct Act {
    typename AdapterCell<T>::Act r_on_r, r_on_i, i_on_r, i_on_i;
  };

  ComplexFeatureMap<T> forward(const ParameterStore<T>& store,
                               const ComplexFeatureMap<T>& x, Act& act) const {
    Plane<T> rr = cell_r_.forward(store, x.re, act.r_on_r);
    Plane<T> ri = cell_r_.forward(store, x.im, act.r_on_i);
    Plane<T> ir = cell_i_.forward(store, x.re, act.i_on_r);
    Plane<T> ii = cell_i_.forward(store, x.im, act.i_on_i);
    ComplexFeatureMap<T> out = x;  // skip connection
    for (size_t n = 0; n < out.re.data.size(); ++n) {
      out.re.data[n] += rr.data[n] - ii.data[n];
      out.im.data[n] += ri.data[n] + ir.data[n];
    }
    return out;
  }

  ComplexFeatureMap<T> backward(const ParameterStore<T>& store,
                                GradSink<T>& sink, const Act& act,
                                const ComplexFeatureMap<T>& gout) const {
    // delta_r = rr - ii, delta_i = ri + ir, out = in + delta.
    Plane<T> g_rr = gout.re;
    Plane<T> g_ii = gout.re;
    for (T& v : g_ii.data) v = -v;
    const Plane<T>& g_ri = gout.im;
    const Plane<T>& g_ir = gout.im;

    Plane<T> gx_r1 = cell_r_.backward(store, sink, act.r_on_r, g_rr);
    Plane<T> gx_i1 = cell_r_.backward(store, sink, act.r_on_i, g_ri);
    Plane<T> gx_r2 = cell_i_.backward(store, sink, act.i_on_r, g_ir);
    Plane<T> gx_i2 = cell_i_.backward(store, sink, act.i_on_i, g_ii);

    ComplexFeatureMap<T> gin = gout;  // skip path
    for (size_t n = 0; n < gin.re.data.size(); ++n) {
      gin.re.data[n] += gx_r1.data[n] + gx_r2.data[n];
      gin.im.data[n] += gx_i1.data[n] + gx_i2.data[n];
    }
    return gin;
  }

 private:
  AdapterCell<T> cell_r_, cell_i_;
};

// ---------------------------------------------------------------------------
// Attention gate on a skip pathway. Each channel is scaled by a sigmoid of a
// linear map over per-channel magnitude descriptors (mean |.| over F, T).
// ---------------------------------------------------------------------------

template <typename T>
class AttentionGate {
 public:
  AttentionGate() = default;

  AttentionGate(ParameterStore<T>& store, const std::string& prefix,
                int channels)
      : channels_(channels) {
    w_ = store.add(prefix + ".w", ParamGroup::AttentionGate,
                   {channels, channels});
    b_ = store.add(prefix + ".b", ParamGroup::AttentionGate, {channels});
  }

  int channels() const { return channels_; }

  struct Act {
    ComplexFeatureMap<T> input;
    std::vector<T> desc;  // per-channel mean magnitude
    std::vector<T> gate;  // sigmoid outputs
  };

  ComplexFeatureMap<T> forward(const ParameterStore<T>& store,
                               const ComplexFeatureMap<T>& x, Act& act) const {
    require(x.channels() == channels_, "attention_gate: channel mismatch");
    act.input = x;
    const int C = channels_, F = x.freq(), L = x.frames();
    const T inv_n = T(1) / static_cast<T>(static_cast<size_t>(F) * L);
    act.desc.assign(C, T(0));
    for (int c = 0; c < C; ++c) {
      T acc = 0;
      for (int l = 0; l < L; ++l) {
        const T* xr = x.re.row(c, l);
        const T* xi = x.im.row(c, l);
        for (int f = 0; f < F; ++f) {
          acc += std::sqrt(xr[f] * xr[f] + xi[f] * xi[f]);
        }
      }
      act.desc[c] = acc * inv_n;
    }
    const T* W = store.value(w_);
    const T* B = store.value(b_);
    act.gate.assign(C, T(0));
    for (int c = 0; c < C; ++c) {
      T z = B[c];
      const T* wrow = W + static_cast<size_t>(c) * C;
      for (int c2 = 0; c2 < C; ++c2) z += wrow[c2] * act.desc[c2];
      act.gate[c] = T(1) / (T(1) + std::exp(-z));
    }
    ComplexFeatureMap<T> out = x;
    for (int c = 0; c < C; ++c) {
      const T g = act.gate[c];
      for (int l = 0; l < L; ++l) {
        T* orow = out.re.row(c, l);
        T* oirow = out.im.row(c, l);
        for (int f = 0; f < F; ++f) {
          orow[f] *= g;
          oirow[f] *= g;
        }
      }
    }
    return out;
  }

  ComplexFeatureMap<T> backward(const ParameterStore<T>& store,
                                GradSink<T>& sink, const Act& act,
                                const ComplexFeatureMap<T>& gout) const {
    const ComplexFeatureMap<T>& x = act.input;
    const int C = channels_, F = x.freq(), L = x.frames();
    require(gout.same_shape(x), "attention_gate backward: shape mismatch");
    const T inv_n = T(1) / static_cast<T>(static_cast<size_t>(F) * L);

    // dL/dgate_c = sum over (f,l) of gout . x for that channel.
    std::vector<T> ggate(C, T(0));
    for (int c = 0; c < C; ++c) {
      T acc = 0;
      for (int l = 0; l < L; ++l) {
        const T* gr = gout.re.row(c, l);
        const T* gi = gout.im.row(c, l);
        const T* xr = x.re.row(c, l);
        const T* xi = x.im.row(c, l);
        for (int f = 0; f < F; ++f) acc += gr[f] * xr[f] + gi[f] * xi[f];
      }
      ggate[c] = acc;
    }
    const T* W = store.value(w_);
    T* gW = sink.grad(w_);
    T* gB = sink.grad(b_);
    std::vector<T> gz(C), gdesc(C, T(0));
    for (int c = 0; c < C; ++c) {
      gz[c] = ggate[c] * act.gate[c] * (T(1) - act.gate[c]);
      gB[c] += gz[c];
      T* gwrow = gW + static_cast<size_t>(c) * C;
      const T* wrow = W + static_cast<size_t>(c) * C;
      for (int c2 = 0; c2 < C; ++c2) {
        gwrow[c2] += gz[c] * act.desc[c2];
        gdesc[c2] += gz[c] * wrow[c2];
      }
    }

    ComplexFeatureMap<T> gin(C, F, L);
    const T tiny = static_cast<T>(1e-30);
    for (int c = 0; c < C; ++c) {
      const T g = act.gate[c];
      const T gd = gdesc[c] * inv_n;
      for (int l = 0; l < L; ++l) {
        const T* gr = gout.re.row(c, l);
        const T* gi = gout.im.row(c, l);
        const T* xr = x.re.row(c, l);
        const T* xi = x.im.row(c, l);
        T* or_ = gin.re.row(c, l);
        T* oi_ = gin.im.row(c, l);
        for (int f = 0; f < F; ++f) {
          const T mag = std::sqrt(xr[f] * xr[f] + xi[f] * xi[f]);
          const T inv_mag = mag > tiny ? T(1) / mag : T(0);
          or_[f] = g * gr[f] + gd * xr[f] * inv_mag;
          oi_[f] = g * gi[f] + gd * xi[f] * inv_mag;
        }
      }
    }
    return gin;
  }

  int w() const { return w_; }
  int b() const { return b_; }

 private:
  int channels_ = 0;
  int w_ = -1, b_ = -1;
};

// ---------------------------------------------------------------------------
// Nearest-neighbour frequency upsampling by two (decoder path). The adjoint
// sums the gradient over each duplicated pair.
// ---------------------------------------------------------------------------

template <typename T>
ComplexFeatureMap<T> upsample_freq2(const ComplexFeatureMap<T>& x) {
  const int C = x.channels(), F = x.freq(), L = x.frames();
  ComplexFeatureMap<T> out(C, 2 * F, L);
  for (int c = 0; c < C; ++c) {
    for (int l = 0; l < L; ++l) {
      const T* xr = x.re.row(c, l);
      const T* xi = x.im.row(c, l);
      T* orow = out.re.row(c, l);
      T* oirow = out.im.row(c, l);
      for (int f = 0; f < F; ++f) {
        orow[2 * f] = xr[f];
        orow[2 * f + 1] = xr[f];
        oirow[2 * f] = xi[f];
        oirow[2 * f + 1] = xi[f];
      }
    }
  }
  return out;
}

template <typename T>
ComplexFeatureMap<T> upsample_freq2_adjoint(const ComplexFeatureMap<T>& gout) {
  const int C = gout.channels(), F2 = gout.freq(), L = gout.frames();
  ComplexFeatureMap<T> gin(C, F2 / 2, L);
  for (int c = 0; c < C; ++c) {
    for (int l = 0; l < L; ++l) {
      const T* gr = gout.re.row(c, l);
      const T* gi = gout.im.row(c, l);
      T* orow = gin.re.row(c, l);
      T* oirow = gin.im.row(c, l);
      for (int f = 0; f < F2 / 2; ++f) {
        orow[f] = gr[2 * f] + gr[2 * f + 1];
        oirow[f] = gi[2 * f] + gi[2 * f + 1];
      }
    }
  }
  return gin;
}

}  // namespace dsenh

#endif
