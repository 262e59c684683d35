// Test-only reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// Direct windowed DFT magnitudes of one frame on an m-times oversampled
/// frequency grid, accumulated bin by bin with std::cos/std::sin.
inline std::vector<double> dft_frame_magnitudes(const std::vector<double>& frame,
                                                const std::vector<double>& window,
                                                std::size_t oversample) {
  const std::size_t k = frame.size();
  const std::size_t bins = oversample * k / 2 + 1;
  std::vector<double> mags(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < k; ++n) {
      double angle = 2.0 * M_PI * static_cast<double>(i) * static_cast<double>(n) /
                     (static_cast<double>(oversample) * static_cast<double>(k));
      re += window[n] * frame[n] * std::cos(angle);
      im += window[n] * frame[n] * std::sin(angle);
    }
    mags[i] = std::hypot(re, im);
  }
  return mags;
}

/// Frame-by-frame direct-DFT spectrogram (row major frames x bins).
inline std::vector<double> dft_spectrogram(const std::vector<double>& signal, std::size_t k,
                                           std::size_t hop, std::size_t oversample,
                                           const std::vector<double>& window,
                                           std::size_t* frames_out) {
  const std::size_t bins = oversample * k / 2 + 1;
  const std::size_t frames = (signal.size() - k) / hop + 1;
  std::vector<double> out;
  out.reserve(frames * bins);
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> frame(signal.begin() + static_cast<long>(t * hop),
                              signal.begin() + static_cast<long>(t * hop + k));
    std::vector<double> mags = dft_frame_magnitudes(frame, window, oversample);
    out.insert(out.end(), mags.begin(), mags.end());
  }
  *frames_out = frames;
  return out;
}

/// A finite distribution on vector support points.
struct Discrete {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;
};

/// E_{x~p, y~q} f(x, y) by full enumeration.
inline double enumerate_pair_expect(
    const Discrete& p, const Discrete& q,
    const std::function<double(const std::vector<double>&, const std::vector<double>&)>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.support.size(); ++i)
    for (std::size_t j = 0; j < q.support.size(); ++j)
      acc += p.probs[i] * q.probs[j] * f(p.support[i], q.support[j]);
  return acc;
}

/// Composite Simpson quadrature on [a, b] (n even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2 != 0) n += 1;
  double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double normal_pdf(double x, double mu, double sigma) {
  double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

/// E|x - Y| with Y ~ N(mu, sigma), by quadrature over +-12 sigma.
inline double expected_abs_gap(double x, double mu, double sigma) {
  return simpson([=](double y) { return std::fabs(x - y) * normal_pdf(y, mu, sigma); },
                 mu - 12.0 * sigma, mu + 12.0 * sigma, 4000);
}

/// Mean of the chi distribution with n degrees of freedom,
/// sqrt(2) Gamma((n+1)/2) / Gamma(n/2).
inline double chi_mean(int n) {
  return std::sqrt(2.0) * std::exp(std::lgamma((n + 1) / 2.0) - std::lgamma(n / 2.0));
}

}  // namespace oracle
