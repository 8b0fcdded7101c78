#include "dsenh/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace dsenh {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'E', 'N', 'H', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw FormatError("checkpoint: cannot write " + path);
  }
  void bytes(const void* p, size_t n) {
    out_.write(reinterpret_cast<const char*>(p),
               static_cast<std::streamsize>(n));
  }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void floats(const float* p, size_t n) { bytes(p, n * sizeof(float)); }
  void close() {
    out_.flush();
    if (!out_) throw FormatError("checkpoint: write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path);
    buf_.assign((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  }
  void bytes(void* p, size_t n) {
    if (pos_ + n > buf_.size()) {
      throw FormatError("checkpoint: truncated file");
    }
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint32_t u32() {
    uint32_t v;
    bytes(&v, 4);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    bytes(&v, 8);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    if (n > buf_.size()) throw FormatError("checkpoint: truncated string");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void floats(float* p, size_t n) { bytes(p, n * sizeof(float)); }
  bool exhausted() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  size_t pos_ = 0;
};

}  // namespace

ModelBundle build_model(const ModelConfig& cfg, uint64_t init_seed) {
  cfg.validate();
  ModelBundle b;
  b.config = cfg;
  b.net = ComplexMaskNet<float>(cfg, b.store);
  init_parameters(b.store, init_seed);
  bool any = false;
  for (bool f : cfg.adapter_flags) any = any || f;
  if (any) {
    b.net.insert_adapters(b.store, cfg.adapter_flags, init_seed);
  }
  b.config = b.net.config();
  b.rng = Rng(init_seed);
  return b;
}

void save_checkpoint(const ModelBundle& bundle, const std::string& path) {
  Writer w(path);
  w.bytes(kMagic, 8);
  w.u32(kVersion);
  w.str(model_config_to_json(bundle.config).dump());

  const auto& store = bundle.store;
  w.u64(static_cast<uint64_t>(store.count()));
  uint64_t offset = 0;
  for (int i = 0; i < store.count(); ++i) {
    const auto& e = store.entry(i);
    w.str(e.name);
    w.u32(static_cast<uint32_t>(e.group));
    w.u8(e.frozen ? 1 : 0);
    w.u32(static_cast<uint32_t>(e.shape.size()));
    for (int d : e.shape) w.u32(static_cast<uint32_t>(d));
    w.u64(offset);
    offset += e.size();
  }
  w.u64(offset);
  for (int i = 0; i < store.count(); ++i) {
    const auto& e = store.entry(i);
    w.floats(e.value.data(), e.size());
  }

  const auto& m = bundle.optimizer.moment1();
  const auto& v = bundle.optimizer.moment2();
  const bool has_opt = static_cast<int>(m.size()) == store.count();
  w.u8(has_opt ? 1 : 0);
  if (has_opt) {
    w.u64(bundle.optimizer.step_count());
    const auto& oc = bundle.optimizer.config();
    w.f64(oc.lr);
    w.f64(oc.beta1);
    w.f64(oc.beta2);
    w.f64(oc.eps);
    for (int i = 0; i < store.count(); ++i) {
      w.floats(m[i].data(), m[i].size());
      w.floats(v[i].data(), v[i].size());
    }
  }
  w.str(bundle.rng.serialize());
  w.u64(bundle.training_step);
  w.close();
}

ModelBundle load_checkpoint(const std::string& path, const ModelConfig* expect) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("checkpoint: bad magic in " + path);
  }
  const uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(version));
  }
  ModelConfig cfg;
  try {
    cfg = model_config_from_json(nlohmann::json::parse(r.str()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad config block: ") + e.what());
  }
  if (expect != nullptr && !(cfg == *expect)) {
    throw FormatError("checkpoint: stored ModelConfig does not match the "
                      "expected configuration");
  }

  ModelBundle b = build_model(cfg, /*init_seed=*/0);
  auto& store = b.store;

  const uint64_t count = r.u64();
  if (count != static_cast<uint64_t>(store.count())) {
    throw FormatError("checkpoint: parameter count mismatch");
  }
  std::vector<uint64_t> offsets(count);
  for (uint64_t i = 0; i < count; ++i) {
    auto& e = store.entry(static_cast<int>(i));
    const std::string name = r.str();
    if (name != e.name) {
      throw FormatError("checkpoint: parameter table mismatch at '" + name +
                        "' (expected '" + e.name + "')");
    }
    e.group = static_cast<ParamGroup>(r.u32());
    e.frozen = r.u8() != 0;
    const uint32_t ndim = r.u32();
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(r.u32());
    if (shape != e.shape) {
      throw FormatError("checkpoint: shape mismatch for '" + name + "'");
    }
    offsets[i] = r.u64();
  }
  const uint64_t payload = r.u64();
  if (payload != store.total_elements()) {
    throw FormatError("checkpoint: payload size mismatch");
  }
  for (uint64_t i = 0; i < count; ++i) {
    auto& e = store.entry(static_cast<int>(i));
    r.floats(e.value.data(), e.size());
  }

  if (r.u8() != 0) {
    AdamConfig oc;
    const uint64_t opt_step = r.u64();
    oc.lr = r.f64();
    oc.beta1 = r.f64();
    oc.beta2 = r.f64();
    oc.eps = r.f64();
    b.optimizer = Adam<float>(oc);
    b.optimizer.ensure_state(store);
    b.optimizer.set_step_count(opt_step);
    for (int i = 0; i < store.count(); ++i) {
      r.floats(b.optimizer.moment1()[i].data(), store.entry(i).size());
      r.floats(b.optimizer.moment2()[i].data(), store.entry(i).size());
    }
  }
  b.rng.deserialize(r.str());
  b.training_step = r.u64();
  if (!r.exhausted()) {
    throw FormatError("checkpoint: trailing bytes in " + path);
  }
  return b;
}

}  // namespace dsenh
