#include "ged/spectral.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace ged {

double DistanceConfig::alpha_for(std::size_t k) const {
  auto it = alpha.find(k);
  if (it != alpha.end()) return it->second;
  return std::sqrt(static_cast<double>(k) / 2.0);
}

void DistanceConfig::validate() const {
  if (window_lens.empty()) throw std::invalid_argument("DistanceConfig: no window lengths");
  for (std::size_t i = 0; i < window_lens.size(); ++i) {
    if (window_lens[i] < 2 || window_lens[i] % 2 != 0)
      throw std::invalid_argument("DistanceConfig: window lengths must be even and >= 2");
    if (i > 0 && window_lens[i] <= window_lens[i - 1])
      throw std::invalid_argument("DistanceConfig: window lengths must be strictly increasing");
  }
  for (const auto& [k, a] : alpha)
    if (a < 0.0) throw std::invalid_argument("DistanceConfig: alpha_k must be >= 0");
  if (log_eps <= 0.0) throw std::invalid_argument("DistanceConfig: log_eps must be positive");
  if (oversample == 0) throw std::invalid_argument("DistanceConfig: oversample must be >= 1");
  if (use_mel && sample_rate_hz <= 0)
    throw std::invalid_argument("DistanceConfig: mel projection needs a sample rate");
}

namespace {

int thread_cap() {
  static int cap = [] {
    const char* env = std::getenv("GED_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v < 1 ? 1 : v;
  }();
  return cap;
}

std::size_t mel_bands(const DistanceConfig& cfg, std::size_t bins) {
  return cfg.n_mel > 0 ? cfg.n_mel : bins / 2;
}

std::vector<double> mel_project(const std::vector<double>& mags, std::size_t frames,
                                std::size_t bins, const std::vector<double>& fb,
                                std::size_t n_mel) {
  std::vector<double> out(frames * n_mel, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = mags.data() + t * bins;
    for (std::size_t j = 0; j < n_mel; ++j) {
      const double* row = fb.data() + j * bins;
      double acc = 0.0;
      for (std::size_t b = 0; b < bins; ++b) acc += row[b] * src[b];
      out[t * n_mel + j] = acc;
    }
  }
  return out;
}

ScaleBreakdown scale_term(const Waveform& a, const Waveform& b, std::size_t k,
                          const DistanceConfig& cfg) {
  dsp::StftConfig scfg;
  scfg.window_len = k;
  scfg.oversample = cfg.oversample;
  dsp::Spectrogram sa = dsp::stft_magnitude(a, scfg);
  dsp::Spectrogram sb = dsp::stft_magnitude(b, scfg);

  std::size_t bins = sa.bins;
  std::vector<double> ma = std::move(sa.magnitudes);
  std::vector<double> mb = std::move(sb.magnitudes);
  if (cfg.use_mel) {
    std::size_t n_mel = mel_bands(cfg, bins);
    std::vector<double> fb = dsp::mel_filterbank(bins, n_mel, cfg.sample_rate_hz);
    ma = mel_project(ma, sa.frames, bins, fb, n_mel);
    mb = mel_project(mb, sb.frames, bins, fb, n_mel);
    bins = n_mel;
  }

  const double alpha = cfg.alpha_for(k);
  const double eps = cfg.log_eps;
  ScaleBreakdown out;
  for (std::size_t t = 0; t < sa.frames; ++t) {
    const double* ra = ma.data() + t * bins;
    const double* rb = mb.data() + t * bins;
    double l1 = 0.0, l2sq = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      l1 += std::fabs(ra[i] - rb[i]);
      double dl = std::log(ra[i] + eps) - std::log(rb[i] + eps);
      l2sq += dl * dl;
    }
    out.l1 += l1;
    out.weighted_log_l2 += alpha * std::sqrt(l2sq);
  }
  return out;
}

void check_pair(const Waveform& a, const Waveform& b, std::size_t max_window) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument("spectral distance: signals must have equal length");
  if (a.samples.size() < max_window)
    throw std::invalid_argument("spectral distance: signal shorter than largest window");
}

constexpr std::size_t kStandardWindows[] = {64, 128, 256, 512, 1024, 2048};

}  // namespace

double single_scale_distance(const Waveform& a, const Waveform& b, std::size_t k,
                             const DistanceConfig& cfg, bool allow_any_window) {
  cfg.validate();
  if (!allow_any_window) {
    bool ok = false;
    for (std::size_t s : kStandardWindows) ok = ok || s == k;
    if (!ok)
      throw std::invalid_argument(
          "single_scale_distance: window outside {64..2048}; pass allow_any_window to override");
  }
  check_pair(a, b, k);
  ScaleBreakdown bd = scale_term(a, b, k, cfg);
  return bd.l1 + bd.weighted_log_l2;
}

ScaleBreakdown single_scale_breakdown(const Waveform& a, const Waveform& b, std::size_t k,
                                      const DistanceConfig& cfg) {
  cfg.validate();
  check_pair(a, b, k);
  return scale_term(a, b, k, cfg);
}

double multiscale_distance(const Waveform& a, const Waveform& b, const DistanceConfig& cfg) {
  cfg.validate();
  check_pair(a, b, cfg.window_lens.back());

  std::vector<ScaleBreakdown> terms(cfg.window_lens.size());
  int cap = thread_cap();
  if (cap <= 1 || cfg.window_lens.size() == 1) {
    for (std::size_t i = 0; i < cfg.window_lens.size(); ++i)
      terms[i] = scale_term(a, b, cfg.window_lens[i], cfg);
  } else {
    // Per-scale terms are independent; the final sum runs in fixed k order so
    // the result is identical to the sequential path.
    std::vector<std::thread> workers;
    std::size_t n = cfg.window_lens.size();
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(cap), n);
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w]() {
        for (std::size_t i = w; i < n; i += n_workers)
          terms[i] = scale_term(a, b, cfg.window_lens[i], cfg);
      });
    }
    for (auto& t : workers) t.join();
  }
  double total = 0.0;
  for (const ScaleBreakdown& bd : terms) total += bd.l1 + bd.weighted_log_l2;
  return total;
}

// ---------------------------------------------------------------------------
// Graph form. The transform is frame extraction, windowing, two fixed dense
// basis products and an elementwise modulus, so gradients reuse the verified
// primitives.

namespace {

struct ScaleConstants {
  Tensor window_row;   // 1 x k
  Tensor cos_basis_t;  // k x bins
  Tensor sin_basis_t;  // k x bins
};

const ScaleConstants& scale_constants(std::size_t k, std::size_t m) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, ScaleConstants> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(k, m);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto basis = dsp::FourierBasis::get(k, m);
  std::vector<double> ct(k * basis->bins), st(k * basis->bins);
  for (std::size_t i = 0; i < basis->bins; ++i) {
    for (std::size_t n = 0; n < k; ++n) {
      ct[n * basis->bins + i] = basis->cos_rows[i * k + n];
      st[n * basis->bins + i] = basis->sin_rows[i * k + n];
    }
  }
  ScaleConstants sc;
  sc.window_row = Tensor::matrix(1, k, dsp::hann_window(k));
  sc.cos_basis_t = Tensor::matrix(k, basis->bins, std::move(ct));
  sc.sin_basis_t = Tensor::matrix(k, basis->bins, std::move(st));
  return cache.emplace(key, std::move(sc)).first->second;
}

Tensor mel_matrix_node(std::size_t bins, const DistanceConfig& cfg) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, std::size_t, int>, Tensor> cache;
  std::size_t n_mel = mel_bands(cfg, bins);
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(bins, n_mel, cfg.sample_rate_hz);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<double> fb = dsp::mel_filterbank(bins, n_mel, cfg.sample_rate_hz);
  // Transposed so spectrogram (T x bins) * fb_t (bins x n_mel) applies filters.
  std::vector<double> fbt(bins * n_mel);
  for (std::size_t j = 0; j < n_mel; ++j)
    for (std::size_t b = 0; b < bins; ++b) fbt[b * n_mel + j] = fb[j * bins + b];
  Tensor t = Tensor::matrix(bins, n_mel, std::move(fbt));
  cache.emplace(key, t);
  return t;
}

}  // namespace

Tensor spectrogram_node(const Tensor& wave, std::size_t k, const DistanceConfig& cfg) {
  if (wave.rank() != 1) throw std::invalid_argument("spectrogram_node: waveform must be 1-D");
  if (wave.numel() < k)
    throw std::invalid_argument("spectrogram_node: signal shorter than window");
  const ScaleConstants& sc = scale_constants(k, cfg.oversample);
  Tensor frames = frame_extract(wave, k, k / 2);
  Tensor windowed = mul(frames, sc.window_row);
  Tensor c = matmul(windowed, sc.cos_basis_t);
  Tensor s = matmul(windowed, sc.sin_basis_t);
  // Tiny floor keeps the modulus differentiable on silent frames; the offset
  // (at most 1e-12 per bin) cancels between the two spectrograms of a pair.
  Tensor mag = sqrt(add(add(mul(c, c), mul(s, s)), Tensor::scalar(1e-24)));
  if (cfg.use_mel) mag = matmul(mag, mel_matrix_node(mag.cols(), cfg));
  return mag;
}

Tensor single_scale_distance_node_from_specs(const Tensor& spec_a, const Tensor& spec_b,
                                             std::size_t k, const DistanceConfig& cfg) {
  Tensor diff = sub(spec_a, spec_b);
  Tensor l1 = sum(abs(diff));
  Tensor log_diff = sub(log(add(spec_a, Tensor::scalar(cfg.log_eps))),
                        log(add(spec_b, Tensor::scalar(cfg.log_eps))));
  Tensor l2 = sum(l2_norm_rows(log_diff, 1e-12));
  return add(l1, mul(l2, cfg.alpha_for(k)));
}

Tensor multiscale_distance_node(const Tensor& a, const Tensor& b, const DistanceConfig& cfg) {
  cfg.validate();
  if (a.numel() != b.numel())
    throw std::invalid_argument("multiscale_distance_node: signals must have equal length");
  if (a.numel() < cfg.window_lens.back())
    throw std::invalid_argument("multiscale_distance_node: signal shorter than largest window");
  Tensor total;
  for (std::size_t k : cfg.window_lens) {
    Tensor term = single_scale_distance_node_from_specs(spectrogram_node(a, k, cfg),
                                                        spectrogram_node(b, k, cfg), k, cfg);
    total = total.defined() ? add(total, term) : term;
  }
  return total;
}

}  // namespace ged
