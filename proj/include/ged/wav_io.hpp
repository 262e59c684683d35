#pragma once

#include <stdexcept>
#include <string>

#include "ged/waveform.hpp"

namespace ged {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads a RIFF/WAVE file. Only PCM (format 1), 16-bit, mono is accepted;
/// samples map to [-1, 1) as s / 32768.
Waveform wav_read(const std::string& path);

/// Writes a canonical 44-byte-header PCM16 mono file. Samples are scaled by
/// 32768, rounded half away from zero and clamped to the int16 range, so
/// wav_read(wav_write(x)) matches x within 1/32768 per sample.
void wav_write(const std::string& path, const Waveform& w);

}  // namespace ged
