#include "ged/dsp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ged::dsp {

std::vector<double> hann_window(std::size_t n) {
  if (n == 0) throw std::invalid_argument("hann_window: n must be >= 1");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)));
  }
  return w;
}

std::shared_ptr<const FourierBasis> FourierBasis::get(std::size_t window_len,
                                                      std::size_t oversample) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const FourierBasis>> cache;

  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(window_len, oversample);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto basis = std::make_shared<FourierBasis>();
  basis->window_len = window_len;
  basis->oversample = oversample;
  basis->bins = oversample * window_len / 2 + 1;
  basis->cos_rows.resize(basis->bins * window_len);
  basis->sin_rows.resize(basis->bins * window_len);
  const double denom = static_cast<double>(oversample) * static_cast<double>(window_len);
  for (std::size_t i = 0; i < basis->bins; ++i) {
    for (std::size_t n = 0; n < window_len; ++n) {
      double phase = 2.0 * M_PI * static_cast<double>(i) * static_cast<double>(n) / denom;
      basis->cos_rows[i * window_len + n] = std::cos(phase);
      basis->sin_rows[i * window_len + n] = std::sin(phase);
    }
  }
  cache[key] = basis;
  return basis;
}

namespace {

void check_stft_args(const Waveform& x, const StftConfig& cfg) {
  if (cfg.window_len < 2 || cfg.window_len % 2 != 0)
    throw std::invalid_argument("stft: window_len must be a positive even integer");
  if (cfg.oversample == 0) throw std::invalid_argument("stft: oversample must be >= 1");
  std::size_t hop = cfg.effective_hop();
  if (hop == 0 || hop > cfg.window_len)
    throw std::invalid_argument("stft: hop must be in [1, window_len]");
  if (!cfg.center_pad && x.samples.size() < cfg.window_len)
    throw std::invalid_argument("stft: signal shorter than window (center_pad is off)");
}

std::vector<double> maybe_pad(const Waveform& x, const StftConfig& cfg) {
  if (!cfg.center_pad) return x.samples;
  std::size_t half = cfg.window_len / 2;
  std::vector<double> padded(x.samples.size() + 2 * half, 0.0);
  std::copy(x.samples.begin(), x.samples.end(), padded.begin() + static_cast<long>(half));
  return padded;
}

}  // namespace

std::size_t frame_count(std::size_t signal_len, std::size_t window_len, std::size_t hop) {
  if (signal_len < window_len) return 0;
  return (signal_len - window_len) / hop + 1;
}

Spectrogram stft_magnitude(const Waveform& x, const StftConfig& cfg) {
  check_stft_args(x, cfg);
  std::vector<double> sig = maybe_pad(x, cfg);
  const std::size_t k = cfg.window_len;
  const std::size_t hop = cfg.effective_hop();
  const std::size_t T = frame_count(sig.size(), k, hop);
  auto basis = FourierBasis::get(k, cfg.oversample);
  std::vector<double> w = hann_window(k);

  Spectrogram out;
  out.window_len = k;
  out.frames = T;
  out.bins = basis->bins;
  out.magnitudes.assign(T * out.bins, 0.0);

  std::vector<double> frame(k);
  for (std::size_t t = 0; t < T; ++t) {
    const double* src = sig.data() + t * hop;
    for (std::size_t n = 0; n < k; ++n) frame[n] = w[n] * src[n];
    for (std::size_t i = 0; i < out.bins; ++i) {
      const double* cr = basis->cos_rows.data() + i * k;
      const double* sr = basis->sin_rows.data() + i * k;
      double c = 0.0, s = 0.0;
      for (std::size_t n = 0; n < k; ++n) {
        c += frame[n] * cr[n];
        s += frame[n] * sr[n];
      }
      out.magnitudes[t * out.bins + i] = std::sqrt(c * c + s * s);
    }
  }
  return out;
}

ComplexFrames stft_complex(const Waveform& x, const StftConfig& cfg) {
  if (cfg.oversample != 1)
    throw std::invalid_argument("stft_complex: oversample must be 1");
  check_stft_args(x, cfg);
  std::vector<double> sig = maybe_pad(x, cfg);
  const std::size_t k = cfg.window_len;
  const std::size_t hop = cfg.effective_hop();
  const std::size_t T = frame_count(sig.size(), k, hop);
  auto basis = FourierBasis::get(k, 1);
  std::vector<double> w = hann_window(k);

  ComplexFrames out;
  out.window_len = k;
  out.frames = T;
  out.bins = k / 2 + 1;
  out.coeffs.assign(T * out.bins, {0.0, 0.0});

  std::vector<double> frame(k);
  for (std::size_t t = 0; t < T; ++t) {
    const double* src = sig.data() + t * hop;
    for (std::size_t n = 0; n < k; ++n) frame[n] = w[n] * src[n];
    for (std::size_t i = 0; i < out.bins; ++i) {
      const double* cr = basis->cos_rows.data() + i * k;
      const double* sr = basis->sin_rows.data() + i * k;
      double c = 0.0, s = 0.0;
      for (std::size_t n = 0; n < k; ++n) {
        c += frame[n] * cr[n];
        s += frame[n] * sr[n];
      }
      // X_i = sum_n x[n] exp(-j 2 pi i n / k)
      out.coeffs[t * out.bins + i] = {c, -s};
    }
  }
  return out;
}

std::vector<double> overlap_envelope(std::size_t window_len, std::size_t hop,
                                     std::size_t frames) {
  std::vector<double> w = hann_window(window_len);
  std::vector<double> env((frames - 1) * hop + window_len, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < window_len; ++n) env[t * hop + n] += w[n] * w[n];
  }
  return env;
}

std::vector<double> istft_overlap_add(const ComplexFrames& frames, std::size_t window_len,
                                      std::size_t hop) {
  if (window_len < 2 || window_len % 2 != 0)
    throw std::invalid_argument("istft: window_len must be a positive even integer");
  if (hop != window_len / 2)
    throw std::invalid_argument("istft: only hop = window_len/2 is supported");
  if (frames.frames == 0 || frames.bins != window_len / 2 + 1)
    throw std::invalid_argument("istft: frame matrix does not match window_len");

  const std::size_t k = window_len;
  const std::size_t T = frames.frames;
  const std::size_t half = k / 2;
  std::vector<double> w = hann_window(k);
  std::vector<double> out((T - 1) * hop + k, 0.0);
  std::vector<double> env = overlap_envelope(k, hop, T);

  std::vector<double> time(k);
  for (std::size_t t = 0; t < T; ++t) {
    const std::complex<double>* f = frames.coeffs.data() + t * frames.bins;
    for (std::size_t n = 0; n < k; ++n) {
      double acc = f[0].real();
      for (std::size_t i = 1; i < half; ++i) {
        double phase = 2.0 * M_PI * static_cast<double>(i) * static_cast<double>(n) /
                       static_cast<double>(k);
        acc += 2.0 * (f[i].real() * std::cos(phase) - f[i].imag() * std::sin(phase));
      }
      acc += f[half].real() * std::cos(M_PI * static_cast<double>(n));
      time[n] = acc / static_cast<double>(k);
    }
    for (std::size_t n = 0; n < k; ++n) out[t * hop + n] += w[n] * time[n];
  }
  for (std::size_t s = 0; s < out.size(); ++s) out[s] /= std::max(env[s], 1e-12);
  return out;
}

std::vector<double> mel_filterbank(std::size_t bins, std::size_t n_mel, int sample_rate_hz) {
  if (n_mel == 0 || n_mel >= bins)
    throw std::invalid_argument("mel_filterbank: need 1 <= n_mel < bins");
  if (sample_rate_hz <= 0) throw std::invalid_argument("mel_filterbank: bad sample rate");

  auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto mel_to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

  const double nyquist = static_cast<double>(sample_rate_hz) / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  // Fractional bin positions of the n_mel + 2 mel-spaced breakpoints.
  std::vector<double> pos(n_mel + 2);
  for (std::size_t j = 0; j < pos.size(); ++j) {
    double mel = mel_max * static_cast<double>(j) / static_cast<double>(n_mel + 1);
    pos[j] = mel_to_hz(mel) / nyquist * static_cast<double>(bins - 1);
  }

  std::vector<double> fb(n_mel * bins, 0.0);
  for (std::size_t j = 0; j < n_mel; ++j) {
    double lo = pos[j], mid = pos[j + 1], hi = pos[j + 2];
    for (std::size_t b = 0; b < bins; ++b) {
      double x = static_cast<double>(b);
      double v = 0.0;
      if (x >= lo && x <= mid && mid > lo) v = (x - lo) / (mid - lo);
      else if (x > mid && x <= hi && hi > mid) v = (hi - x) / (hi - mid);
      fb[j * bins + b] = std::max(v, 0.0);
    }
    // Guard against an empty filter when breakpoints land between bins.
    double row_sum = 0.0;
    for (std::size_t b = 0; b < bins; ++b) row_sum += fb[j * bins + b];
    if (row_sum == 0.0) {
      std::size_t nearest = static_cast<std::size_t>(std::lround(std::min(std::max(mid, 0.0),
                                                     static_cast<double>(bins - 1))));
      fb[j * bins + nearest] = 1.0;
    }
  }
  return fb;
}

}  // namespace ged::dsp
