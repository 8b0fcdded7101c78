#ifndef DSENH_FREEZE_HPP
#define DSENH_FREEZE_HPP

#include <string>

#include "dsenh/params.hpp"

namespace dsenh {

// Training regimes. `fine_tune` and `adapter_tune` both keep the attention
// gates (the skip pathway) trainable.
enum class FreezePolicy { Full, FineTune, AdapterTune, Frozen };

inline const char* freeze_policy_name(FreezePolicy p) {
  switch (p) {
    case FreezePolicy::Full: return "full";
    case FreezePolicy::FineTune: return "fine_tune";
    case FreezePolicy::AdapterTune: return "adapter_tune";
    case FreezePolicy::Frozen: return "frozen";
  }
  return "?";
}

inline FreezePolicy freeze_policy_from_name(const std::string& s) {
  if (s == "full") return FreezePolicy::Full;
  if (s == "fine_tune") return FreezePolicy::FineTune;
  if (s == "adapter_tune") return FreezePolicy::AdapterTune;
  if (s == "frozen") return FreezePolicy::Frozen;
  throw ValidationError("unknown freeze policy: " + s);
}

inline bool policy_trains_group(FreezePolicy p, ParamGroup g) {
  switch (p) {
    case FreezePolicy::Full:
      return true;
    case FreezePolicy::FineTune:
      return g == ParamGroup::EncoderFsmn || g == ParamGroup::AttentionGate;
    case FreezePolicy::AdapterTune:
      return g == ParamGroup::Adapter || g == ParamGroup::AttentionGate;
    case FreezePolicy::Frozen:
      return false;
  }
  return false;
}

template <typename T>
void apply_freeze_policy(ParameterStore<T>& store, FreezePolicy policy) {
  for (int i = 0; i < store.count(); ++i) {
    auto& e = store.entry(i);
    e.frozen = !policy_trains_group(policy, e.group);
  }
}

struct TrainableCounts {
  size_t trainable = 0;
  size_t total = 0;
};

template <typename T>
TrainableCounts count_trainable(const ParameterStore<T>& store,
                                FreezePolicy policy) {
  TrainableCounts c;
  for (int i = 0; i < store.count(); ++i) {
    const auto& e = store.entry(i);
    c.total += e.size();
    if (policy_trains_group(policy, e.group)) c.trainable += e.size();
  }
  return c;
}

}  // namespace dsenh

#endif
