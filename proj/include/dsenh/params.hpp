#ifndef DSENH_PARAMS_HPP
#define DSENH_PARAMS_HPP

#include <numeric>
#include <string>
#include <vector>

#include "dsenh/common.hpp"

namespace dsenh {

// Structural role of a parameter; freeze policies select on this.
enum class ParamGroup : uint32_t {
  EncoderConv = 0,
  EncoderFsmn = 1,
  AttentionGate = 2,
  DecoderConv = 3,
  OutputConv = 4,
  Adapter = 5,
};

inline const char* param_group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::EncoderConv: return "encoder_conv";
    case ParamGroup::EncoderFsmn: return "encoder_fsmn";
    case ParamGroup::AttentionGate: return "attention_gate";
    case ParamGroup::DecoderConv: return "decoder_conv";
    case ParamGroup::OutputConv: return "output_conv";
    case ParamGroup::Adapter: return "adapter";
  }
  return "?";
}

// Named trainable arrays with freeze flags and gradient slots. Layers hold
// indices into the store; values are shared read-only across worker threads
// during forward/backward, gradients are reduced into the store afterwards.
template <typename T>
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    ParamGroup group;
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool frozen = false;

    size_t size() const { return value.size(); }
  };

  int add(const std::string& name, ParamGroup group,
          const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) {
      require(d > 0, "parameter shape must be positive: " + name);
      n *= static_cast<size_t>(d);
    }
    for (const Entry& e : entries_) {
      require(e.name != name, "duplicate parameter name: " + name);
    }
    Entry e;
    e.name = name;
    e.group = group;
    e.shape = shape;
    e.value.assign(n, T(0));
    e.grad.assign(n, T(0));
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
  }

  int count() const { return static_cast<int>(entries_.size()); }
  Entry& entry(int idx) { return entries_.at(idx); }
  const Entry& entry(int idx) const { return entries_.at(idx); }

  T* value(int idx) { return entries_[idx].value.data(); }
  const T* value(int idx) const { return entries_[idx].value.data(); }

  size_t total_elements() const {
    size_t n = 0;
    for (const Entry& e : entries_) n += e.size();
    return n;
  }

  size_t trainable_elements() const {
    size_t n = 0;
    for (const Entry& e : entries_) {
      if (!e.frozen) n += e.size();
    }
    return n;
  }

  void zero_grad() {
    for (Entry& e : entries_) std::fill(e.grad.begin(), e.grad.end(), T(0));
  }

  // Zero the gradient slots of frozen parameters (they may have been written
  // by a backward pass that does not consult freeze flags).
  void clear_frozen_grads() {
    for (Entry& e : entries_) {
      if (e.frozen) std::fill(e.grad.begin(), e.grad.end(), T(0));
    }
  }

  int find(const std::string& name) const {
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

 private:
  std::vector<Entry> entries_;
};

// Destination for parameter gradients during backward. Worker threads point
// this at private buffers so a fixed-order reduction afterwards keeps
// results independent of thread count.
template <typename T>
class GradSink {
 public:
  explicit GradSink(ParameterStore<T>& store) : store_(&store) {}

  GradSink(ParameterStore<T>& store, std::vector<std::vector<T>>& local)
      : store_(&store), local_(&local) {
    local.resize(store.count());
    for (int i = 0; i < store.count(); ++i) {
      local_->at(i).assign(store.entry(i).size(), T(0));
    }
  }

  T* grad(int idx) {
    if (local_) return local_->at(idx).data();
    return store_->entry(idx).grad.data();
  }

  // False when the parameter is frozen; layers may skip accumulating its
  // gradient entirely (the input gradient must still flow through).
  bool wants(int idx) const { return !store_->entry(idx).frozen; }

 private:
  ParameterStore<T>* store_;
  std::vector<std::vector<T>>* local_ = nullptr;
};

}  // namespace dsenh

#endif
