#include "ged/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ged/dsp.hpp"

namespace ged::eval {

ModeCoverage mode_coverage(const std::vector<std::vector<double>>& samples,
                           const std::vector<std::vector<double>>& modes, double radius) {
  if (samples.empty()) throw std::invalid_argument("mode_coverage: empty samples");
  if (modes.empty()) throw std::invalid_argument("mode_coverage: empty modes");
  std::vector<double> nearest(samples.size());
  std::vector<std::size_t> counts(modes.size(), 0);
  std::size_t within = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    double best = 0.0;
    std::size_t best_mode = 0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      if (samples[s].size() != modes[m].size())
        throw std::invalid_argument("mode_coverage: dimension mismatch");
      double acc = 0.0;
      for (std::size_t i = 0; i < modes[m].size(); ++i) {
        double d = samples[s][i] - modes[m][i];
        acc += d * d;
      }
      double dist = std::sqrt(acc);
      if (m == 0 || dist < best) {
        best = dist;
        best_mode = m;
      }
    }
    nearest[s] = best;
    counts[best_mode] += 1;
    if (best <= radius) within += 1;
  }
  ModeCoverage out;
  out.fraction_within = static_cast<double>(within) / static_cast<double>(samples.size());
  out.per_mode_share.resize(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m)
    out.per_mode_share[m] = static_cast<double>(counts[m]) / static_cast<double>(samples.size());
  std::sort(nearest.begin(), nearest.end());
  std::size_t n = nearest.size();
  out.median_nearest_dist = n % 2 == 1 ? nearest[n / 2]
                                       : 0.5 * (nearest[n / 2 - 1] + nearest[n / 2]);
  return out;
}

NormProjectionStats norm_projection_stats(const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("norm_projection_stats: empty samples");
  NormProjectionStats out;
  double sum_norm = 0.0, sum_norm_sq = 0.0, sum_avg = 0.0;
  for (const auto& s : samples) {
    double acc = 0.0, coord = 0.0;
    for (double v : s) {
      acc += v * v;
      coord += v;
    }
    double norm = std::sqrt(acc);
    sum_norm += norm;
    sum_norm_sq += norm * norm;
    sum_avg += s.empty() ? 0.0 : coord / static_cast<double>(s.size());
  }
  double n = static_cast<double>(samples.size());
  out.mean_l2_norm = sum_norm / n;
  out.mean_coord_avg = sum_avg / n;
  double var = sum_norm_sq / n - out.mean_l2_norm * out.mean_l2_norm;
  out.std_l2_norm = std::sqrt(std::max(var, 0.0));
  return out;
}

GaussianStats fit_gaussian(const std::vector<std::vector<double>>& samples, bool diagonal) {
  if (samples.size() < 2) throw std::invalid_argument("fit_gaussian: need >= 2 samples");
  const std::size_t d = samples[0].size();
  GaussianStats out;
  out.diagonal = diagonal;
  out.mean.assign(d, 0.0);
  out.cov.assign(d * d, 0.0);
  for (const auto& s : samples) {
    if (s.size() != d) throw std::invalid_argument("fit_gaussian: ragged samples");
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += s[i];
  }
  double n = static_cast<double>(samples.size());
  for (double& m : out.mean) m /= n;
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) {
      double di = s[i] - out.mean[i];
      if (diagonal) {
        out.cov[i * d + i] += di * di;
      } else {
        for (std::size_t j = i; j < d; ++j) out.cov[i * d + j] += di * (s[j] - out.mean[j]);
      }
    }
  }
  double denom = n - 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      out.cov[i * d + j] /= denom;
      out.cov[j * d + i] = out.cov[i * d + j];
    }
  return out;
}

std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                       std::vector<double>* eigenvectors_out) {
  std::vector<double> v;
  if (eigenvectors_out) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          double aip = a[i * n + p], aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double api = a[p * n + i], aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        if (eigenvectors_out) {
          for (std::size_t i = 0; i < n; ++i) {
            double vip = v[i * n + p], viq = v[i * n + q];
            v[i * n + p] = c * vip - s * viq;
            v[i * n + q] = s * vip + c * viq;
          }
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  if (eigenvectors_out) *eigenvectors_out = std::move(v);
  return eig;
}

namespace {

constexpr double kSymTol = 1e-10;

void check_psd(const GaussianStats& g) {
  const std::size_t d = g.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::fabs(g.cov[i * d + j] - g.cov[j * d + i]) > kSymTol)
        throw std::invalid_argument("frechet_gaussian: covariance not symmetric");
  if (g.diagonal) {
    for (std::size_t i = 0; i < d; ++i)
      if (g.cov[i * d + i] < -kSymTol)
        throw std::invalid_argument("frechet_gaussian: negative variance");
  } else {
    std::vector<double> eig = jacobi_eigenvalues(g.cov, d);
    for (double e : eig)
      if (e < -kSymTol)
        throw std::invalid_argument("frechet_gaussian: covariance not PSD");
  }
}

/// Symmetric PSD square root via eigendecomposition.
std::vector<double> psd_sqrt(const std::vector<double>& m, std::size_t n) {
  std::vector<double> vecs;
  std::vector<double> eig = jacobi_eigenvalues(m, n, &vecs);
  std::vector<double> out(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double lam = std::sqrt(std::max(eig[k], 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out[i * n + j] += lam * vecs[i * n + k] * vecs[j * n + k];
  }
  return out;
}

std::vector<double> matmul_sq(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t n) {
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double av = a[i * n + k];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * b[k * n + j];
    }
  return out;
}

}  // namespace

double frechet_gaussian(const GaussianStats& a, const GaussianStats& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("frechet_gaussian: dimension mismatch");
  check_psd(a);
  check_psd(b);
  const std::size_t d = a.dim();
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double diff = a.mean[i] - b.mean[i];
    mean_term += diff * diff;
  }
  double trace_term = 0.0;
  if (a.diagonal && b.diagonal) {
    for (std::size_t i = 0; i < d; ++i) {
      double sa = std::max(a.cov[i * d + i], 0.0);
      double sb = std::max(b.cov[i * d + i], 0.0);
      trace_term += sa + sb - 2.0 * std::sqrt(sa * sb);
    }
  } else {
    // Tr((Sa^1/2 Sb Sa^1/2)^1/2) equals Tr((Sa Sb)^1/2) for PSD inputs.
    std::vector<double> ra = psd_sqrt(a.cov, d);
    std::vector<double> inner = matmul_sq(matmul_sq(ra, b.cov, d), ra, d);
    // Symmetrize against round-off before the eigensolve.
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        double s = 0.5 * (inner[i * d + j] + inner[j * d + i]);
        inner[i * d + j] = inner[j * d + i] = s;
      }
    std::vector<double> eig = jacobi_eigenvalues(inner, d);
    double tr_a = 0.0, tr_b = 0.0, tr_sqrt = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      tr_a += a.cov[i * d + i];
      tr_b += b.cov[i * d + i];
      tr_sqrt += std::sqrt(std::max(eig[i], 0.0));
    }
    trace_term = tr_a + tr_b - 2.0 * tr_sqrt;
  }
  return mean_term + trace_term;
}

GaussianStats embed_spectral(const std::vector<Waveform>& samples, std::size_t k,
                             std::size_t oversample, double log_eps, bool diagonal) {
  if (samples.size() < 2) throw std::invalid_argument("embed_spectral: need >= 2 samples");
  const std::size_t len = samples[0].samples.size();
  std::vector<std::vector<double>> embeddings;
  embeddings.reserve(samples.size());
  dsp::StftConfig cfg;
  cfg.window_len = k;
  cfg.oversample = oversample;
  for (const auto& w : samples) {
    if (w.samples.size() != len)
      throw std::invalid_argument("embed_spectral: waveforms must have equal length");
    dsp::Spectrogram spec = dsp::stft_magnitude(w, cfg);
    std::vector<double> e(spec.bins, 0.0);
    for (std::size_t t = 0; t < spec.frames; ++t)
      for (std::size_t i = 0; i < spec.bins; ++i)
        e[i] += std::log(spec.at(t, i) + log_eps);
    for (double& v : e) v /= static_cast<double>(spec.frames);
    embeddings.push_back(std::move(e));
  }
  return fit_gaussian(embeddings, diagonal);
}

bool pitch_peak_match(const Waveform& y, double f0_hz, std::size_t k) {
  validate_waveform(y);
  if (y.samples.size() < k) throw std::invalid_argument("pitch_peak_match: signal shorter than window");
  if (f0_hz <= 0.0 || f0_hz > static_cast<double>(y.sample_rate_hz) / 2.0)
    throw std::invalid_argument("pitch_peak_match: f0 outside (0, Nyquist]");
  dsp::StftConfig cfg;
  cfg.window_len = k;
  cfg.oversample = 1;
  dsp::Spectrogram spec = dsp::stft_magnitude(y, cfg);
  std::vector<double> avg(spec.bins, 0.0);
  for (std::size_t t = 0; t < spec.frames; ++t)
    for (std::size_t i = 0; i < spec.bins; ++i) avg[i] += spec.at(t, i);
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < avg.size(); ++i)
    if (avg[i] > avg[argmax]) argmax = i;
  double expected_bin = f0_hz * static_cast<double>(k) / static_cast<double>(y.sample_rate_hz);
  return std::fabs(static_cast<double>(argmax) - expected_bin) <= 1.0;
}

}  // namespace ged::eval
