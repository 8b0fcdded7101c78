#ifndef DSENH_OPTIMIZER_HPP
#define DSENH_OPTIMIZER_HPP

#include <cmath>
#include <vector>

#include "dsenh/params.hpp"

namespace dsenh {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Frozen parameters are skipped entirely: their
// values and moment buffers are never touched, so they stay bit-identical
// across any number of steps.
template <typename T>
class Adam {
 public:
  Adam() = default;
  explicit Adam(const AdamConfig& cfg) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  uint64_t step_count() const { return step_; }

  void step(ParameterStore<T>& store) {
    ensure_state(store);
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (int p = 0; p < store.count(); ++p) {
      auto& e = store.entry(p);
      if (e.frozen) continue;
      std::vector<T>& m = m_[p];
      std::vector<T>& v = v_[p];
      for (size_t i = 0; i < e.value.size(); ++i) {
        const double g = static_cast<double>(e.grad[i]);
        const double mi = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
        const double vi = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        e.value[i] = static_cast<T>(e.value[i] -
                                    cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  // Serialization access for checkpointing.
  std::vector<std::vector<T>>& moment1() { return m_; }
  std::vector<std::vector<T>>& moment2() { return v_; }
  const std::vector<std::vector<T>>& moment1() const { return m_; }
  const std::vector<std::vector<T>>& moment2() const { return v_; }
  void set_step_count(uint64_t s) { step_ = s; }
  void set_config(const AdamConfig& c) { cfg_ = c; }

  void ensure_state(const ParameterStore<T>& store) {
    if (static_cast<int>(m_.size()) == store.count()) return;
    m_.resize(store.count());
    v_.resize(store.count());
    for (int p = 0; p < store.count(); ++p) {
      if (m_[p].size() != store.entry(p).size()) {
        m_[p].assign(store.entry(p).size(), T(0));
        v_[p].assign(store.entry(p).size(), T(0));
      }
    }
  }

 private:
  AdamConfig cfg_;
  uint64_t step_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace dsenh

#endif
