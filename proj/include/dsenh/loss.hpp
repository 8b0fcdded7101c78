#ifndef DSENH_LOSS_HPP
#define DSENH_LOSS_HPP

#include <cmath>
#include <vector>

#include "dsenh/common.hpp"
#include "dsenh/waveform.hpp"

namespace dsenh {

constexpr double kSiSnrEps = 1e-8;

// Negative scale-invariant SNR. Both signals are mean-removed, the estimate
// is decomposed into its projection onto the target and a residual, and the
// loss is -10 log10((|s_t|^2 + eps) / (|e|^2 + eps)).
template <typename T>
struct SiSnrResult {
  double loss = 0.0;
  std::vector<T> grad;  // d loss / d estimate
};

template <typename T>
SiSnrResult<T> si_snr_loss(const std::vector<T>& estimate,
                           const std::vector<T>& target,
                           bool with_grad = true) {
  const size_t n = estimate.size();
  require(n >= 1 && target.size() == n,
          "si_snr: signals must have equal nonzero length");

  double mean_e = 0.0, mean_t = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_e += estimate[i];
    mean_t += target[i];
  }
  mean_e /= static_cast<double>(n);
  mean_t /= static_cast<double>(n);

  double dot = 0.0, t_energy = 0.0, e_energy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double ec = estimate[i] - mean_e;
    const double tc = target[i] - mean_t;
    dot += ec * tc;
    t_energy += tc * tc;
    e_energy += ec * ec;
  }
  require(t_energy > 0.0, "si_snr: target signal is identically zero");

  const double alpha = dot / t_energy;
  const double proj_energy = alpha * alpha * t_energy;  // |s_t|^2
  const double resid_energy = e_energy - proj_energy;   // |e|^2, >= 0
  const double A = proj_energy + kSiSnrEps;
  const double B = std::max(resid_energy, 0.0) + kSiSnrEps;

  SiSnrResult<T> out;
  out.loss = -10.0 * std::log10(A / B);
  if (!with_grad) return out;

  // d loss/d e_c = -(10/ln10) * (2 alpha t_c / A - 2 resid / B), then remove
  // the mean to account for the centering.
  const double k = 10.0 / std::log(10.0);
  out.grad.resize(n);
  double gmean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double ec = estimate[i] - mean_e;
    const double tc = target[i] - mean_t;
    const double resid = ec - alpha * tc;
    const double g = -k * (2.0 * alpha * tc / A - 2.0 * resid / B);
    out.grad[i] = static_cast<T>(g);
    gmean += g;
  }
  gmean /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    out.grad[i] -= static_cast<T>(gmean);
  }
  return out;
}

// Evaluation metric: the loss without negation. metric(estimate, target)
// equals -si_snr_loss(estimate, target) exactly.
template <typename T>
double si_snr_metric(const std::vector<T>& estimate,
                     const std::vector<T>& target) {
  return -si_snr_loss(estimate, target, /*with_grad=*/false).loss;
}

inline double si_snr_metric(const Waveform& estimate, const Waveform& target) {
  return si_snr_metric(estimate.samples, target.samples);
}

}  // namespace dsenh

#endif
