#ifndef DSENH_RNG_HPP
#define DSENH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace dsenh {

// mt19937_64 with hand-rolled draw helpers. Distributions are implemented
// directly on raw engine output so results only depend on the engine, which
// has a standardized bit stream; std::*_distribution output is
// implementation-defined and would tie checkpoints to one libstdc++ version.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) {
    // Rejection-free modulo bias is negligible for n << 2^64; keep it simple.
    return engine_() % n;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Independent stream derived from (seed, index); used for per-record and
  // per-item work so parallel schedules cannot change the draws.
  static Rng derive(uint64_t seed, uint64_t index) {
    // splitmix64 on the pair, two rounds.
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return Rng(z);
  }

  std::string serialize() const {
    std::ostringstream oss;
    oss << engine_ << " " << (have_spare_ ? 1 : 0) << " " << spare_;
    return oss.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream iss(s);
    int flag = 0;
    iss >> engine_ >> flag >> spare_;
    have_spare_ = (flag != 0);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dsenh

#endif
