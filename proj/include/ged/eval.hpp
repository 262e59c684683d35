#pragma once

#include <cstddef>
#include <vector>

#include "ged/waveform.hpp"

namespace ged::eval {

/// Gaussian fit of an embedding set. Off-diagonal covariance entries are only
/// populated in full mode.
struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> cov;  // dim x dim row major (diagonal-only fits still use this layout)
  bool diagonal = true;

  std::size_t dim() const { return mean.size(); }
};

struct ModeCoverage {
  double fraction_within = 0.0;
  std::vector<double> per_mode_share;  // sums to 1 over modes
  double median_nearest_dist = 0.0;
};

/// Nearest-mode statistics of a sample cloud against a fixed set of modes.
ModeCoverage mode_coverage(const std::vector<std::vector<double>>& samples,
                           const std::vector<std::vector<double>>& modes, double radius);

struct NormProjectionStats {
  double mean_l2_norm = 0.0;
  double std_l2_norm = 0.0;
  double mean_coord_avg = 0.0;
};

/// Moments of ||x||_2 and of the coordinate average over a sample cloud.
NormProjectionStats norm_projection_stats(const std::vector<std::vector<double>>& samples);

/// Gaussian fit (mean + covariance) of a set of equal-length vectors.
GaussianStats fit_gaussian(const std::vector<std::vector<double>>& samples, bool diagonal = true);

/// Squared 2-Wasserstein distance between Gaussians:
/// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^(1/2)).
double frechet_gaussian(const GaussianStats& a, const GaussianStats& b);

/// Per-sample embedding = time average of log(magnitude + eps) spectrogram
/// frames at window k; returns the Gaussian fit over the sample set.
GaussianStats embed_spectral(const std::vector<Waveform>& samples, std::size_t k,
                             std::size_t oversample = 1, double log_eps = 1e-5,
                             bool diagonal = true);

/// True when the argmax bin of the time-averaged magnitude spectrum (window k,
/// no oversampling) lies within one bin of f0 * k / sample_rate.
bool pitch_peak_match(const Waveform& y, double f0_hz, std::size_t k);

/// Symmetric-eigenproblem helper (cyclic Jacobi); exposed for the PSD
/// square-root path and its tests. Returns eigenvalues; eigenvectors_out
/// columns hold the corresponding vectors when non-null.
std::vector<double> jacobi_eigenvalues(std::vector<double> matrix, std::size_t n,
                                       std::vector<double>* eigenvectors_out = nullptr);

}  // namespace ged::eval
