#include <doctest.h>

#include <cmath>
#include <complex>

#include "dsenh/layers.hpp"
#include "dsenh/rng.hpp"

#include "testutil.hpp"

using namespace dsenh;
using testutil::dot;
using testutil::fd_max_rel_err;
using testutil::random_fmap;

namespace {

void randomize(ParameterStore<double>& store, uint64_t seed, double scale = 0.8) {
  Rng rng(seed);
  for (int i = 0; i < store.count(); ++i) {
    for (double& v : store.entry(i).value) v = rng.uniform(-scale, scale);
  }
}

// FD-checks every parameter of `store` and the layer input against the
// analytic gradients produced by one backward pass.
template <typename Layer>
double layer_fd_worst(Layer& layer, ParameterStore<double>& store,
                      ComplexFeatureMap<double> x, uint64_t seed) {
  Rng rng(seed);
  typename Layer::Act act;
  auto out0 = layer.forward(store, x, act);
  ComplexFeatureMap<double> R(out0.channels(), out0.freq(), out0.frames());
  for (double& v : R.re.data) v = rng.uniform(-1, 1);
  for (double& v : R.im.data) v = rng.uniform(-1, 1);

  store.zero_grad();
  GradSink<double> sink(store);
  typename Layer::Act act2;
  layer.forward(store, x, act2);
  auto gin = layer.backward(store, sink, act2, R);

  auto eval = [&]() {
    typename Layer::Act a;
    return dot(layer.forward(store, x, a), R);
  };

  double worst = 0.0;
  for (int p = 0; p < store.count(); ++p) {
    auto& e = store.entry(p);
    worst = std::max(worst, fd_max_rel_err(e.value.data(), e.grad.data(),
                                           e.value.size(), eval));
  }
  worst = std::max(worst, fd_max_rel_err(x.re.data.data(), gin.re.data.data(),
                                         x.re.data.size(), eval));
  worst = std::max(worst, fd_max_rel_err(x.im.data.data(), gin.im.data.data(),
                                         x.im.data.size(), eval));
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Complex convolution
// ---------------------------------------------------------------------------

TEST_CASE("complex conv: zero input yields bias-only output") {
  ParameterStore<double> store;
  ConvSpec cs{2, 3, 3, 2, 1, 1};
  ComplexConv2d<double> conv(store, "c", ParamGroup::EncoderConv, cs);
  randomize(store, 1);
  store.entry(conv.b_r()).value = {0.1, -0.2, 0.3};
  store.entry(conv.b_i()).value = {-0.5, 0.0, 0.25};

  ComplexFeatureMap<double> x(2, 8, 4);
  ComplexConv2d<double>::Act act;
  auto out = conv.forward(store, x, act);
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l < 4; ++l) {
      for (int f = 0; f < 8; ++f) {
        CHECK(out.re.at(c, f, l) == store.entry(conv.b_r()).value[c]);
        CHECK(out.im.at(c, f, l) == store.entry(conv.b_i()).value[c]);
      }
    }
  }
}

TEST_CASE("complex conv: real-only input with zero imaginary kernel") {
  ParameterStore<double> store;
  ConvSpec cs{1, 1, 3, 2, 1, 1};
  ComplexConv2d<double> conv(store, "c", ParamGroup::EncoderConv, cs);
  randomize(store, 2);
  std::fill(store.entry(conv.w_i()).value.begin(),
            store.entry(conv.w_i()).value.end(), 0.0);
  const double bias_i = 0.37;
  store.entry(conv.b_i()).value = {bias_i};

  Rng rng(3);
  ComplexFeatureMap<double> x(1, 8, 5);
  for (double& v : x.re.data) v = rng.uniform(-1, 1);  // imag stays zero
  ComplexConv2d<double>::Act act;
  auto out = conv.forward(store, x, act);
  for (double v : out.im.data) CHECK(v == doctest::Approx(bias_i));
}

TEST_CASE("complex conv: 1x1 kernel is elementwise complex product") {
  ParameterStore<double> store;
  ConvSpec cs{1, 1, 1, 1, 1, 0};
  ComplexConv2d<double> conv(store, "c", ParamGroup::EncoderConv, cs);
  const double a = 0.8, b = -0.6;
  store.entry(conv.w_r()).value = {a};
  store.entry(conv.w_i()).value = {b};

  ComplexFeatureMap<double> x(1, 4, 3);
  Rng rng(4);
  for (double& v : x.re.data) v = rng.uniform(-1, 1);
  for (double& v : x.im.data) v = rng.uniform(-1, 1);
  ComplexConv2d<double>::Act act;
  auto out = conv.forward(store, x, act);
  for (size_t i = 0; i < x.re.data.size(); ++i) {
    const double c = x.re.data[i], d = x.im.data[i];
    CHECK(out.re.data[i] == doctest::Approx(a * c - b * d));
    CHECK(out.im.data[i] == doctest::Approx(a * d + b * c));
  }
}

TEST_CASE("complex conv is complex-linear without bias") {
  ParameterStore<double> store;
  ConvSpec cs{2, 2, 3, 2, 1, 1};
  ComplexConv2d<double> conv(store, "c", ParamGroup::EncoderConv, cs);
  randomize(store, 5);
  std::fill(store.entry(conv.b_r()).value.begin(),
            store.entry(conv.b_r()).value.end(), 0.0);
  std::fill(store.entry(conv.b_i()).value.begin(),
            store.entry(conv.b_i()).value.end(), 0.0);

  Rng rng(6);
  auto x = random_fmap<double>(2, 8, 4, rng);
  const std::complex<double> z(0.7, -1.3);
  auto zx = x;
  for (size_t i = 0; i < x.re.data.size(); ++i) {
    const std::complex<double> v(x.re.data[i], x.im.data[i]);
    const auto w = z * v;
    zx.re.data[i] = w.real();
    zx.im.data[i] = w.imag();
  }
  ComplexConv2d<double>::Act a1, a2;
  auto out = conv.forward(store, x, a1);
  auto out_z = conv.forward(store, zx, a2);
  for (size_t i = 0; i < out.re.data.size(); ++i) {
    const std::complex<double> v(out.re.data[i], out.im.data[i]);
    const auto expect = z * v;
    CHECK(std::abs(out_z.re.data[i] - expect.real()) < 1e-6);
    CHECK(std::abs(out_z.im.data[i] - expect.imag()) < 1e-6);
  }
}

TEST_CASE("complex conv is causal in time") {
  ParameterStore<double> store;
  ConvSpec cs{1, 2, 3, 2, 2, 1};
  ComplexConv2d<double> conv(store, "c", ParamGroup::EncoderConv, cs);
  randomize(store, 7);

  Rng rng(8);
  auto x = random_fmap<double>(1, 8, 6, rng);
  const int cut = 3;
  auto x2 = x;
  for (int l = cut + 1; l < 6; ++l) {
    for (int f = 0; f < 8; ++f) {
      x2.re.at(0, f, l) = 0.0;
      x2.im.at(0, f, l) = 0.0;
    }
  }
  ComplexConv2d<double>::Act a1, a2;
  auto o1 = conv.forward(store, x, a1);
  auto o2 = conv.forward(store, x2, a2);
  for (int c = 0; c < 2; ++c) {
    for (int l = 0; l <= cut; ++l) {
      for (int f = 0; f < o1.freq(); ++f) {
        CHECK(o1.re.at(c, f, l) == o2.re.at(c, f, l));
        CHECK(o1.im.at(c, f, l) == o2.im.at(c, f, l));
      }
    }
  }
}

TEST_CASE("complex conv gradients match finite differences") {
  for (int stride : {1, 2}) {
    ParameterStore<double> store;
    ConvSpec cs{2, 3, 3, 2, stride, 1};
    ComplexConv2d<double> conv(store, "c", ParamGroup::EncoderConv, cs);
    randomize(store, 10 + stride);
    Rng rng(20 + stride);
    auto x = random_fmap<double>(2, 8, 5, rng);
    CHECK(layer_fd_worst(conv, store, x, 30 + stride) < 1e-4);
  }
}

// ---------------------------------------------------------------------------
// FSMN
// ---------------------------------------------------------------------------

TEST_CASE("fsmn with zero taps and identity projection is the identity") {
  ParameterStore<double> store;
  Fsmn<double> fsmn(store, "f", ParamGroup::EncoderFsmn, 2, 6, 0);
  // identity proj, zero bias
  auto& proj = store.entry(fsmn.proj_idx()).value;
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 6; ++d) proj[(c * 6 + d) * 6 + d] = 1.0;
  }
  Rng rng(40);
  auto x = random_fmap<double>(2, 6, 5, rng);
  Fsmn<double>::Act act;
  auto out = fsmn.forward(store, x, act);
  for (size_t i = 0; i < x.re.data.size(); ++i) {
    CHECK(out.re.data[i] == doctest::Approx(x.re.data[i]));
    CHECK(out.im.data[i] == doctest::Approx(x.im.data[i]));
  }
}

TEST_CASE("fsmn impulse response spans exactly N past frames") {
  ParameterStore<double> store;
  Fsmn<double> fsmn(store, "f", ParamGroup::EncoderFsmn, 1, 4, 2);
  auto& proj = store.entry(fsmn.proj_idx()).value;
  for (int d = 0; d < 4; ++d) proj[d * 4 + d] = 1.0;
  auto& taps = store.entry(fsmn.taps_param_idx()).value;
  std::fill(taps.begin(), taps.end(), 0.4);

  ComplexFeatureMap<double> x(1, 4, 6);
  for (int f = 0; f < 4; ++f) x.re.at(0, f, 0) = 1.0;  // impulse at frame 0
  Fsmn<double>::Act act;
  auto out = fsmn.forward(store, x, act);
  for (int l = 0; l < 6; ++l) {
    double mag = 0.0;
    for (int f = 0; f < 4; ++f) mag += std::abs(out.re.at(0, f, l));
    if (l <= 2) {
      CHECK(mag > 0.0);
    } else {
      CHECK(mag == 0.0);
    }
  }
}

TEST_CASE("fsmn hand case: ones input, identity proj, single 0.5 tap") {
  ParameterStore<double> store;
  Fsmn<double> fsmn(store, "f", ParamGroup::EncoderFsmn, 1, 3, 1);
  auto& proj = store.entry(fsmn.proj_idx()).value;
  for (int d = 0; d < 3; ++d) proj[d * 3 + d] = 1.0;
  auto& taps = store.entry(fsmn.taps_param_idx()).value;
  std::fill(taps.begin(), taps.end(), 0.5);

  ComplexFeatureMap<double> x(1, 3, 4);
  x.re.fill(1.0);
  Fsmn<double>::Act act;
  auto out = fsmn.forward(store, x, act);
  for (int f = 0; f < 3; ++f) {
    CHECK(out.re.at(0, f, 0) == doctest::Approx(1.0));
    for (int l = 1; l < 4; ++l) {
      CHECK(out.re.at(0, f, l) == doctest::Approx(1.5));
    }
  }
}

TEST_CASE("fsmn is strictly causal") {
  ParameterStore<double> store;
  Fsmn<double> fsmn(store, "f", ParamGroup::EncoderFsmn, 2, 4, 3);
  randomize(store, 50);
  Rng rng(51);
  auto x = random_fmap<double>(2, 4, 7, rng);
  auto x2 = x;
  const int cut = 4;
  for (int c = 0; c < 2; ++c) {
    for (int l = cut + 1; l < 7; ++l) {
      for (int f = 0; f < 4; ++f) {
        x2.re.at(c, f, l) = 0.0;
        x2.im.at(c, f, l) = 0.0;
      }
    }
  }
  Fsmn<double>::Act a1, a2;
  auto o1 = fsmn.forward(store, x, a1);
  auto o2 = fsmn.forward(store, x2, a2);
  for (int c = 0; c < 2; ++c) {
    for (int l = 0; l <= cut; ++l) {
      for (int f = 0; f < 4; ++f) {
        CHECK(o1.re.at(c, f, l) == o2.re.at(c, f, l));
      }
    }
  }
}

TEST_CASE("fsmn gradients match finite differences") {
  ParameterStore<double> store;
  Fsmn<double> fsmn(store, "f", ParamGroup::EncoderFsmn, 2, 5, 2);
  randomize(store, 60);
  Rng rng(61);
  auto x = random_fmap<double>(2, 5, 4, rng);
  CHECK(layer_fd_worst(fsmn, store, x, 62) < 1e-4);
}

// ---------------------------------------------------------------------------
// Adapter cell and bottleneck adapter
// ---------------------------------------------------------------------------

TEST_CASE("fresh adapter cell outputs zero for any input") {
  ParameterStore<double> store;
  AdapterCell<double> cell(store, "a", 8);
  // w1/b1 random, w2/b2 zero as at construction
  Rng rng(70);
  for (double& v : store.entry(cell.w1()).value) v = rng.uniform(-1, 1);
  Plane<double> u(3, 8, 4);
  for (double& v : u.data) v = rng.uniform(-1, 1);
  AdapterCell<double>::Act act;
  auto out = cell.forward(store, u, act);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("adapter cell hand case F=2") {
  ParameterStore<double> store;
  AdapterCell<double> cell(store, "a", 2);
  store.entry(cell.w1()).value = {1.0, 1.0};   // 1x2
  store.entry(cell.w2()).value = {1.0, 1.0};   // 2x1
  Plane<double> u(1, 2, 1);
  u.at(0, 0, 0) = 3.0;
  u.at(0, 1, 0) = -1.0;
  AdapterCell<double>::Act act;
  auto out = cell.forward(store, u, act);
  CHECK(out.at(0, 0, 0) == doctest::Approx(2.0));
  CHECK(out.at(0, 1, 0) == doctest::Approx(2.0));

  // ReLU dead zone: negated input gives h = relu(-2) = 0.
  u.at(0, 0, 0) = -3.0;
  u.at(0, 1, 0) = 1.0;
  auto out2 = cell.forward(store, u, act);
  CHECK(out2.at(0, 0, 0) == 0.0);
  CHECK(out2.at(0, 1, 0) == 0.0);
}

TEST_CASE("adapter cell rejects mismatched frequency dim") {
  ParameterStore<double> store;
  AdapterCell<double> cell(store, "a", 8);
  Plane<double> u(1, 6, 2);
  AdapterCell<double>::Act act;
  CHECK_THROWS_AS(cell.forward(store, u, act), ValidationError);
}

TEST_CASE("fresh bottleneck adapter is an exact identity") {
  ParameterStore<double> store;
  BottleneckAdapter<double> ad(store, "ad", 8);
  Rng rng(80);
  for (double& v : store.entry(ad.cell_r().w1()).value) v = rng.uniform(-1, 1);
  for (double& v : store.entry(ad.cell_i().w1()).value) v = rng.uniform(-1, 1);
  auto x = random_fmap<double>(2, 8, 3, rng);
  BottleneckAdapter<double>::Act act;
  auto out = ad.forward(store, x, act);
  for (size_t i = 0; i < x.re.data.size(); ++i) {
    CHECK(out.re.data[i] == x.re.data[i]);
    CHECK(out.im.data[i] == x.im.data[i]);
  }
}

TEST_CASE("adapter complex combination, diagnostic linear cells") {
  // cell_r acts as u -> 2u on the all-ones column, cell_i is zero:
  // delta = 2 + 2i, out = in + delta = 3 + 3i.
  ParameterStore<double> store;
  BottleneckAdapter<double> ad(store, "ad", 2);
  store.entry(ad.cell_r().w1()).value = {1.0, 1.0};
  store.entry(ad.cell_r().w2()).value = {1.0, 1.0};
  ComplexFeatureMap<double> x(1, 2, 1);
  x.re.fill(1.0);
  x.im.fill(1.0);
  BottleneckAdapter<double>::Act act;
  auto out = ad.forward(store, x, act);
  for (int f = 0; f < 2; ++f) {
    CHECK(out.re.at(0, f, 0) == doctest::Approx(3.0));
    CHECK(out.im.at(0, f, 0) == doctest::Approx(3.0));
  }

  // cell_r zero, cell_i as u -> u: delta_r = -1, delta_i = 1 -> out = 0 + 2i.
  ParameterStore<double> store2;
  BottleneckAdapter<double> ad2(store2, "ad", 2);
  store2.entry(ad2.cell_i().w1()).value = {0.5, 0.5};
  store2.entry(ad2.cell_i().w2()).value = {1.0, 1.0};
  auto out2 = ad2.forward(store2, x, act);
  for (int f = 0; f < 2; ++f) {
    CHECK(out2.re.at(0, f, 0) == doctest::Approx(0.0));
    CHECK(out2.im.at(0, f, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("bottleneck adapter gradients match finite differences") {
  ParameterStore<double> store;
  BottleneckAdapter<double> ad(store, "ad", 6);
  randomize(store, 90);
  Rng rng(91);
  auto x = random_fmap<double>(2, 6, 3, rng);
  CHECK(layer_fd_worst(ad, store, x, 92) < 1e-4);
}

// ---------------------------------------------------------------------------
// Attention gate
// ---------------------------------------------------------------------------

TEST_CASE("attention gate with zero parameters halves the skip") {
  ParameterStore<double> store;
  AttentionGate<double> gate(store, "g", 3);
  Rng rng(100);
  auto x = random_fmap<double>(3, 4, 5, rng);
  AttentionGate<double>::Act act;
  auto out = gate.forward(store, x, act);
  for (size_t i = 0; i < x.re.data.size(); ++i) {
    CHECK(out.re.data[i] == doctest::Approx(0.5 * x.re.data[i]));
    CHECK(out.im.data[i] == doctest::Approx(0.5 * x.im.data[i]));
  }
}

TEST_CASE("attention gate saturates open at large bias") {
  ParameterStore<double> store;
  AttentionGate<double> gate(store, "g", 2);
  std::fill(store.entry(gate.b()).value.begin(),
            store.entry(gate.b()).value.end(), 20.0);
  Rng rng(101);
  auto x = random_fmap<double>(2, 4, 3, rng);
  AttentionGate<double>::Act act;
  auto out = gate.forward(store, x, act);
  for (size_t i = 0; i < x.re.data.size(); ++i) {
    CHECK(std::abs(out.re.data[i] - x.re.data[i]) < 1e-8);
    CHECK(std::abs(out.im.data[i] - x.im.data[i]) < 1e-8);
  }
}

TEST_CASE("attention gate maps zero skip to zero for any parameters") {
  ParameterStore<double> store;
  AttentionGate<double> gate(store, "g", 2);
  randomize(store, 102);
  ComplexFeatureMap<double> x(2, 4, 3);
  AttentionGate<double>::Act act;
  auto out = gate.forward(store, x, act);
  for (double v : out.re.data) CHECK(v == 0.0);
  for (double v : out.im.data) CHECK(v == 0.0);
}

TEST_CASE("attention gate preserves shape and keeps gains in (0,1)") {
  ParameterStore<double> store;
  AttentionGate<double> gate(store, "g", 3);
  randomize(store, 103);
  Rng rng(104);
  auto x = random_fmap<double>(3, 6, 4, rng);
  AttentionGate<double>::Act act;
  auto out = gate.forward(store, x, act);
  CHECK(out.channels() == 3);
  CHECK(out.freq() == 6);
  CHECK(out.frames() == 4);
  for (double g : act.gate) {
    CHECK(g > 0.0);
    CHECK(g < 1.0);
  }
}

TEST_CASE("attention gate gradients match finite differences") {
  ParameterStore<double> store;
  AttentionGate<double> gate(store, "g", 3);
  randomize(store, 110);
  Rng rng(111);
  auto x = random_fmap<double>(3, 5, 4, rng);
  CHECK(layer_fd_worst(gate, store, x, 112) < 1e-4);
}

// ---------------------------------------------------------------------------
// Upsampling
// ---------------------------------------------------------------------------

TEST_CASE("frequency upsampling duplicates bins and its adjoint sums them") {
  Rng rng(120);
  auto x = random_fmap<double>(2, 4, 3, rng);
  auto up = upsample_freq2(x);
  CHECK(up.freq() == 8);
  for (int c = 0; c < 2; ++c) {
    for (int l = 0; l < 3; ++l) {
      for (int f = 0; f < 4; ++f) {
        CHECK(up.re.at(c, 2 * f, l) == x.re.at(c, f, l));
        CHECK(up.re.at(c, 2 * f + 1, l) == x.re.at(c, f, l));
      }
    }
  }
  // Adjoint identity: <up(x), y> == <x, up_adj(y)>.
  auto y = random_fmap<double>(2, 8, 3, rng);
  auto adj = upsample_freq2_adjoint(y);
  CHECK(dot(up, y) == doctest::Approx(dot(x, adj)).epsilon(1e-12));
}
