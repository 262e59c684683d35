#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "ged/autodiff.hpp"
#include "ged/dsp.hpp"
#include "ged/waveform.hpp"

namespace ged {

/// Hyper-parameters of the multi-scale spectrogram distance: window lengths k,
/// per-scale weights alpha_k (default sqrt(k/2)), oversampling factor, the
/// additive floor inside the log term, and the optional mel projection.
struct DistanceConfig {
  std::vector<std::size_t> window_lens{64, 128, 256, 512, 1024, 2048};
  std::map<std::size_t, double> alpha;  // empty entry -> sqrt(k/2)
  std::size_t oversample = 8;
  double log_eps = 1e-5;
  bool use_mel = false;
  std::size_t n_mel = 0;  // 0 -> bins/2
  int sample_rate_hz = 0;  // only needed when use_mel is set

  double alpha_for(std::size_t k) const;
  void validate() const;
};

/// Sum over scales k and frames t of
///   |s_t^k(a) - s_t^k(b)|_1 + alpha_k * |log(s_t^k(a)+eps) - log(s_t^k(b)+eps)|_2.
double multiscale_distance(const Waveform& a, const Waveform& b, const DistanceConfig& cfg);

/// One term of the sum above. k must be one of {64,...,2048} unless
/// allow_any_window is set.
double single_scale_distance(const Waveform& a, const Waveform& b, std::size_t k,
                             const DistanceConfig& cfg, bool allow_any_window = false);

/// Per-term contributions of one scale: plain L1 part and the alpha-weighted
/// log-L2 part.
struct ScaleBreakdown {
  double l1 = 0.0;
  double weighted_log_l2 = 0.0;
  double total() const { return l1 + weighted_log_l2; }
};
ScaleBreakdown single_scale_breakdown(const Waveform& a, const Waveform& b, std::size_t k,
                                      const DistanceConfig& cfg);

/// Graph magnitude spectrogram (frames x bins) of a waveform tensor at one
/// window length, mel-projected when the config asks for it.
Tensor spectrogram_node(const Tensor& wave, std::size_t k, const DistanceConfig& cfg);

/// Distance restricted to one scale, from precomputed spectrogram nodes.
Tensor single_scale_distance_node_from_specs(const Tensor& spec_a, const Tensor& spec_b,
                                             std::size_t k, const DistanceConfig& cfg);

/// Differentiable form of multiscale_distance. Value matches the plain version
/// on the same inputs; gradients flow into both waveform tensors.
Tensor multiscale_distance_node(const Tensor& a, const Tensor& b, const DistanceConfig& cfg);

}  // namespace ged
