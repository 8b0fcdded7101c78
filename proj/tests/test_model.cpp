#include <doctest.h>

#include <cmath>

#include "dsenh/checkpoint.hpp"
#include "dsenh/freeze.hpp"
#include "dsenh/model.hpp"
#include "dsenh/rng.hpp"

using namespace dsenh;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.fft_size = 64;  // net_freq 32
  cfg.channels = {2, 3};
  cfg.fsmn_taps = 2;
  cfg.enc_kf = 3;
  return cfg;
}

template <typename T>
Spectrogram<T> random_spec(int bins, int frames, uint64_t seed) {
  Rng rng(seed);
  Spectrogram<T> s(bins, frames);
  for (auto& z : s.data) {
    z = {static_cast<T>(rng.uniform(-1, 1)), static_cast<T>(rng.uniform(-1, 1))};
  }
  return s;
}

}  // namespace

TEST_CASE("fresh adapters leave the forward output unchanged") {
  for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    ParameterStore<float> store;
    ModelConfig cfg = tiny_config();
    ComplexMaskNet<float> net(cfg, store);
    init_parameters(store, seed);
    auto Y = random_spec<float>(cfg.input_bins(), 6, seed * 7 + 1);

    auto before = model_forward(net, store, Y, ForwardMode::WithoutAdapters);
    net.insert_adapters(store, {true, true}, seed + 99);
    auto with = model_forward(net, store, Y, ForwardMode::WithAdapters);
    auto without = model_forward(net, store, Y, ForwardMode::WithoutAdapters);

    for (size_t i = 0; i < before.data.size(); ++i) {
      CHECK(std::abs(with.data[i].real() - before.data[i].real()) <= 1e-7f);
      CHECK(std::abs(with.data[i].imag() - before.data[i].imag()) <= 1e-7f);
      CHECK(without.data[i] == before.data[i]);
    }
  }
}

TEST_CASE("zero input spectrogram produces a finite mask") {
  ParameterStore<float> store;
  ModelConfig cfg = tiny_config();
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 3);
  Spectrogram<float> Y(cfg.input_bins(), 5);
  auto mask = model_forward(net, store, Y);
  CHECK(mask.finite());
}

TEST_CASE("forward is deterministic") {
  ParameterStore<float> store;
  ModelConfig cfg = tiny_config();
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 4);
  auto Y = random_spec<float>(cfg.input_bins(), 7, 44);
  auto a = model_forward(net, store, Y);
  auto b = model_forward(net, store, Y);
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("mask output matches the input grid with Nyquist pinned to zero") {
  ParameterStore<float> store;
  ModelConfig cfg = tiny_config();
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 5);
  auto Y = random_spec<float>(cfg.input_bins(), 9, 55);
  auto mask = model_forward(net, store, Y);
  CHECK(mask.bins == Y.bins);
  CHECK(mask.frames == Y.frames);
  for (int l = 0; l < mask.frames; ++l) {
    CHECK(mask.at(cfg.net_freq(), l) == std::complex<float>(0, 0));
  }
}

TEST_CASE("model rejects a mismatched spectrogram") {
  ParameterStore<float> store;
  ModelConfig cfg = tiny_config();
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 6);
  auto Y = random_spec<float>(cfg.input_bins() + 2, 4, 66);
  CHECK_THROWS_AS(model_forward(net, store, Y), ValidationError);
}

TEST_CASE("insert_adapters with all flags false changes nothing") {
  ParameterStore<float> store;
  ModelConfig cfg = tiny_config();
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 7);
  const size_t before = store.total_elements();
  const int count_before = store.count();
  net.insert_adapters(store, {false, false}, 1);
  CHECK(store.total_elements() == before);
  CHECK(store.count() == count_before);
}

TEST_CASE("adapter parameter count arithmetic") {
  CHECK(adapter_param_count(64) == 8384);  // 2*(64*32*2 + 32 + 64)

  // One adapter at F = 64: config with a single block over fft 256.
  ParameterStore<float> store;
  ModelConfig cfg;
  cfg.fft_size = 256;
  cfg.channels = {2};
  cfg.enc_kf = 3;
  cfg.fsmn_taps = 1;
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 8);
  const size_t before = store.total_elements();
  net.insert_adapters(store, {true}, 9);
  CHECK(store.total_elements() - before == 8384);
}

TEST_CASE("insert then forward keeps pre-existing parameters untouched") {
  ParameterStore<float> store;
  ModelConfig cfg = tiny_config();
  ComplexMaskNet<float> net(cfg, store);
  init_parameters(store, 10);
  std::vector<std::vector<float>> snapshot;
  for (int i = 0; i < store.count(); ++i) {
    snapshot.push_back(store.entry(i).value);
  }
  const int base_count = store.count();
  net.insert_adapters(store, {true, true}, 11);
  for (int i = 0; i < base_count; ++i) {
    CHECK(store.entry(i).value == snapshot[i]);
  }
}

TEST_CASE("insert_adapters validates flag count") {
  ParameterStore<float> store;
  ComplexMaskNet<float> net(tiny_config(), store);
  CHECK_THROWS_AS(net.insert_adapters(store, {true}, 1), ValidationError);
}

TEST_CASE("model config serialization round trip") {
  ModelConfig cfg = tiny_config();
  cfg.adapter_flags = {true, false};
  auto j = model_config_to_json(cfg);
  ModelConfig back = model_config_from_json(j);
  CHECK(back == cfg);
  // And through text, as a checkpoint stores it.
  ModelConfig back2 =
      model_config_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back2 == cfg);
}

TEST_CASE("trainable parameter counts and ordering on the default config") {
  ModelConfig cfg;  // default desk-scale architecture
  cfg.adapter_flags.assign(cfg.blocks(), true);
  ModelBundle b = build_model(cfg, 1);

  const auto frozen = count_trainable(b.store, FreezePolicy::Frozen);
  const auto full = count_trainable(b.store, FreezePolicy::Full);
  const auto fine = count_trainable(b.store, FreezePolicy::FineTune);
  const auto adapter = count_trainable(b.store, FreezePolicy::AdapterTune);

  CHECK(frozen.trainable == 0);
  CHECK(full.trainable == full.total);
  CHECK(adapter.trainable < fine.trainable);
  CHECK(fine.trainable < full.trainable);
  CHECK(adapter.trainable <
        static_cast<size_t>(0.15 * static_cast<double>(full.total)));

  // adapter_tune = adapters + attention gates, by shape arithmetic.
  size_t expect = 0;
  for (int bk = 0; bk < cfg.blocks(); ++bk) {
    expect += adapter_param_count(cfg.freq_at(bk));
    const size_t c = static_cast<size_t>(cfg.channels[bk]);
    expect += c * c + c;  // gate
  }
  CHECK(adapter.trainable == expect);
}
