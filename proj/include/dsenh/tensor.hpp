#ifndef DSENH_TENSOR_HPP
#define DSENH_TENSOR_HPP

#include <cstddef>
#include <vector>

#include "dsenh/common.hpp"

namespace dsenh {

// Dense real array over (channel, frame, freq); freq is contiguous so the
// frequency projections in the FSMN and adapter layers are unit-stride.
template <typename T>
struct Plane {
  int channels = 0;
  int freq = 0;
  int frames = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int c, int f, int t)
      : channels(c), freq(f), frames(t),
        data(static_cast<size_t>(c) * f * t, T(0)) {}

  T* row(int c, int l) {
    return data.data() + (static_cast<size_t>(c) * frames + l) * freq;
  }
  const T* row(int c, int l) const {
    return data.data() + (static_cast<size_t>(c) * frames + l) * freq;
  }
  T& at(int c, int f, int l) { return row(c, l)[f]; }
  const T& at(int c, int f, int l) const { return row(c, l)[f]; }

  bool same_shape(const Plane& o) const {
    return channels == o.channels && freq == o.freq && frames == o.frames;
  }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

// Complex feature map U = U_r + i*U_i with explicit real/imaginary planes.
template <typename T>
struct ComplexFeatureMap {
  Plane<T> re, im;

  ComplexFeatureMap() = default;
  ComplexFeatureMap(int c, int f, int t) : re(c, f, t), im(c, f, t) {}

  int channels() const { return re.channels; }
  int freq() const { return re.freq; }
  int frames() const { return re.frames; }

  bool same_shape(const ComplexFeatureMap& o) const {
    return re.same_shape(o.re);
  }
  bool finite() const { return all_finite(re.data) && all_finite(im.data); }
  void fill(T v) { re.fill(v); im.fill(v); }
};

}  // namespace dsenh

#endif
