#include "ged/wav_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace ged {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void wr_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

Waveform wav_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("wav_read: cannot open " + path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    throw IoError("wav_read: not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* pcm = nullptr;
  std::uint32_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    char id[5] = {0};
    std::memcpy(id, data.data() + pos, 4);
    std::uint32_t chunk_size = rd_u32(data.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > data.size())
      throw IoError(std::string("wav_read: truncated chunk '") + id + "' in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw IoError("wav_read: short 'fmt ' chunk in " + path);
      format = rd_u16(data.data() + body);
      channels = rd_u16(data.data() + body + 2);
      sample_rate = rd_u32(data.data() + body + 4);
      bits = rd_u16(data.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      pcm = data.data() + body;
      pcm_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size % 2);  // chunks are word aligned
  }
  if (!have_fmt) throw IoError("wav_read: missing 'fmt ' chunk in " + path);
  if (!pcm) throw IoError("wav_read: missing 'data' chunk in " + path);
  if (format != 1) throw IoError("wav_read: unsupported format (need PCM code 1): " + path);
  if (channels != 1) throw IoError("wav_read: unsupported channel count (need mono): " + path);
  if (bits != 16) throw IoError("wav_read: unsupported bit depth (need 16): " + path);

  Waveform w;
  w.sample_rate_hz = static_cast<int>(sample_rate);
  std::size_t n = pcm_bytes / 2;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t s = static_cast<std::int16_t>(rd_u16(pcm + 2 * i));
    w.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return w;
}

void wav_write(const std::string& path, const Waveform& w) {
  if (w.sample_rate_hz <= 0) throw IoError("wav_write: bad sample rate");
  std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  wr_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  wr_u32(out, 16);
  wr_u16(out, 1);  // PCM
  wr_u16(out, 1);  // mono
  wr_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  wr_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);  // byte rate
  wr_u16(out, 2);   // block align
  wr_u16(out, 16);  // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  wr_u32(out, data_bytes);
  for (double v : w.samples) {
    double scaled = v * 32768.0;
    double rounded = scaled >= 0.0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5);
    rounded = std::min(32767.0, std::max(-32768.0, rounded));
    wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(rounded)));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("wav_write: cannot open " + path);
  os.write(reinterpret_cast<const char*>(out.data()), static_cast<long>(out.size()));
  if (!os) throw IoError("wav_write: write failed: " + path);
}

}  // namespace ged
