#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ged {

/// A mono audio signal: amplitude samples (nominal range [-1,1]) plus sample rate.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  std::size_t size() const { return samples.size(); }
};

inline void validate_waveform(const Waveform& w) {
  if (w.samples.empty()) throw std::invalid_argument("waveform: empty signal");
  if (w.sample_rate_hz <= 0) throw std::invalid_argument("waveform: sample rate must be positive");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("waveform: non-finite sample");
  }
}

}  // namespace ged
