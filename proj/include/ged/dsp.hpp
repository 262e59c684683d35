#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ged/waveform.hpp"

namespace ged::dsp {

/// STFT analysis parameters. hop = 0 means "use window_len / 2".
struct StftConfig {
  std::size_t window_len = 0;
  std::size_t hop = 0;
  std::size_t oversample = 8;
  bool center_pad = false;

  std::size_t effective_hop() const { return hop == 0 ? window_len / 2 : hop; }
};

/// Magnitude spectrogram: frames x bins, row major. bins = oversample*window_len/2 + 1.
struct Spectrogram {
  std::size_t window_len = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> magnitudes;

  double at(std::size_t t, std::size_t i) const { return magnitudes[t * bins + i]; }
};

/// Complex STFT frames (oversample = 1 only): frames x (window_len/2 + 1).
struct ComplexFrames {
  std::size_t window_len = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> coeffs;

  std::complex<double> at(std::size_t t, std::size_t i) const { return coeffs[t * bins + i]; }
};

/// Periodic Hann window: w[i] = 0.5*(1 - cos(2*pi*i/n)). At 50% overlap the
/// overlapped window values sum to exactly 1 at every interior sample.
std::vector<double> hann_window(std::size_t n);

/// Oversampled cosine/sine analysis basis for window length k: row i holds
/// cos(2*pi*i*n/(m*k)) resp. sin(...) for n = 0..k-1, i = 0..m*k/2.
/// Shared instances are cached per (k, m).
struct FourierBasis {
  std::size_t window_len = 0;
  std::size_t oversample = 0;
  std::size_t bins = 0;
  std::vector<double> cos_rows;  // bins x window_len
  std::vector<double> sin_rows;

  static std::shared_ptr<const FourierBasis> get(std::size_t window_len, std::size_t oversample);
};

/// Magnitude of the windowed, m-times oversampled Fourier transform of each frame.
Spectrogram stft_magnitude(const Waveform& x, const StftConfig& cfg);

/// Standard windowed real DFT per frame (oversample must be 1).
ComplexFrames stft_complex(const Waveform& x, const StftConfig& cfg);

/// Inverse STFT by windowed overlap-add with least-squares envelope division
/// (envelope floored at 1e-12). Only hop = window_len/2 is supported.
/// Output length is (frames-1)*hop + window_len.
std::vector<double> istft_overlap_add(const ComplexFrames& frames, std::size_t window_len,
                                      std::size_t hop);

/// Triangular mel filters (rows sum > 0, supports contiguous) spanning 0 Hz to
/// Nyquist on the mel scale mel(f) = 2595*log10(1 + f/700).
/// Result is n_mel x bins, row major.
std::vector<double> mel_filterbank(std::size_t bins, std::size_t n_mel, int sample_rate_hz);

/// Squared-window synthesis envelope for the overlap-add reconstruction:
/// env[s] = sum_t w[s - t*hop]^2, length (frames-1)*hop + window_len.
std::vector<double> overlap_envelope(std::size_t window_len, std::size_t hop,
                                     std::size_t frames);

/// Frame count for a signal of the given length, or 0 if it is too short.
std::size_t frame_count(std::size_t signal_len, std::size_t window_len, std::size_t hop);

}  // namespace ged::dsp
