#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ged/spectral.hpp"

namespace ged::experiments {

/// Writes via a temp file plus rename so partially written outputs never
/// appear under the final name.
void write_file_atomic(const std::string& path, const std::string& content);

/// Round-trip-exact decimal formatting used by every CSV writer.
std::string fmt(double v);

// ---------------------------------------------------------------------------
// Training experiments. Each writes metrics.csv plus its own artifacts into
// out_dir and returns the path of the JSON report.

struct TrainCommonOptions {
  std::uint64_t seed = 0;
  long steps = 5000;
  std::size_t batch = 64;
  double lr = 1e-3;
  long warmup_steps = 500;
  std::size_t latent_dim = 0;  // 0 = command default
  double eval_truncation = 0.0;  // 0 = no truncation when sampling after training
  bool repulsive = true;
  bool use_ema_for_eval = false;
  std::string out_dir;
};

/// Three-component 2-D Gaussian mixture (means on an equilateral triangle of
/// side 2, sigma 0.25, equal weights). Writes samples.csv, metrics.csv,
/// report.json with a mode-coverage block.
std::string run_train_gmm(const TrainCommonOptions& opt);

/// Single 100-dimensional standard Gaussian. Writes samples.csv, metrics.csv,
/// report.json with norm/projection statistics.
std::string run_train_highdim(const TrainCommonOptions& opt);

struct AudioOptions {
  TrainCommonOptions common{.steps = 10000, .batch = 8};
  std::size_t chunk = 16;
  std::size_t n_blocks = 4;
  std::size_t hidden_channels = 128;
  std::size_t bottleneck_channels = 32;
  std::size_t latent_dim = 8;
  std::size_t n_chunks = 16;
  std::vector<std::size_t> window_lens = {64, 128, 256};
  std::size_t oversample = 8;
  bool use_mel = false;
  int sample_rate_hz = 8000;
  std::size_t held_out = 50;
  std::size_t pitch_eval_window = 256;
  bool write_wavs = true;
};

struct AudioReport {
  double pitch_match_rate = 0.0;
  double dist_gen_real_mean = 0.0;
  double dist_real_real_mean = 0.0;
  double dist_ratio = 0.0;
  double frechet_proxy = 0.0;
  std::string report_path;
};

/// Conditional harmonic-tone synthesis with the inverse-STFT generator.
/// Writes generated WAVs for the held-out pitches, metrics.csv, report.json.
AudioReport run_train_audio(const AudioOptions& opt);

struct AblateOptions {
  std::uint64_t seed = 0;
  long steps = 60;
  std::size_t batch = 2;
  std::size_t n_chunks = 128;  // signal must cover the largest window
  std::string out_dir;
};

/// Appendix-style grid: 6 single-window rows, 5 oversampling rows and the
/// multi-scale baseline. Writes ablate.csv and report.json.
std::string run_ablate(const AblateOptions& opt);

/// Gradient-check table over all primitives plus the full spectral pipeline.
/// Returns the number of failures.
int run_gradcheck(std::ostream& os);

/// Distance between two audio files with a per-scale breakdown printed as CSV.
int run_distance_command(const std::string& file_a, const std::string& file_b,
                         const DistanceConfig& cfg, std::ostream& os);

}  // namespace ged::experiments
