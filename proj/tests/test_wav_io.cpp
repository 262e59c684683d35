#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ged/wav_io.hpp"

using namespace ged;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const char* name) { return fs::temp_directory_path() / name; }

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<long>(bytes.size()));
}

}  // namespace

TEST_CASE("write-then-read of a ramp stays within one quantization step") {
  Waveform w;
  w.sample_rate_hz = 8000;
  for (int i = -1000; i < 1000; ++i) w.samples.push_back(static_cast<double>(i) / 1000.0 * 0.99);

  auto path = tmp_file("ged_ramp.wav");
  wav_write(path.string(), w);
  Waveform r = wav_read(path.string());
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate_hz == 8000);
  double max_err = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    max_err = std::max(max_err, std::fabs(r.samples[i] - w.samples[i]));
  CHECK(max_err <= 1.0 / 32768.0);
  fs::remove(path);
}

TEST_CASE("canonical 44-byte header layout") {
  Waveform w;
  w.sample_rate_hz = 8000;
  w.samples = {0.0, 0.25, -0.25, 0.5};
  auto path = tmp_file("ged_hdr.wav");
  wav_write(path.string(), w);
  std::string b = read_bytes(path);
  REQUIRE(b.size() == 44 + 8);
  CHECK(b.substr(0, 4) == "RIFF");
  CHECK(b.substr(8, 4) == "WAVE");
  CHECK(b.substr(12, 4) == "fmt ");
  // fmt chunk size 16 at offset 16
  CHECK(static_cast<unsigned char>(b[16]) == 16);
  // PCM format code at offset 20, mono at 22, bits at 34
  CHECK(static_cast<unsigned char>(b[20]) == 1);
  CHECK(static_cast<unsigned char>(b[22]) == 1);
  CHECK(static_cast<unsigned char>(b[34]) == 16);
  CHECK(b.substr(36, 4) == "data");
  fs::remove(path);
}

TEST_CASE("clamping and rounding at the rails") {
  Waveform w;
  w.sample_rate_hz = 8000;
  w.samples = {1.5, -1.5, 0.999999};
  auto path = tmp_file("ged_clamp.wav");
  wav_write(path.string(), w);
  Waveform r = wav_read(path.string());
  CHECK(r.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(r.samples[1] == doctest::Approx(-1.0));
  fs::remove(path);
}

TEST_CASE("reader rejects unsupported and damaged files") {
  Waveform w;
  w.sample_rate_hz = 8000;
  w.samples = {0.0, 0.1, 0.2, 0.3};
  auto path = tmp_file("ged_mut.wav");
  wav_write(path.string(), w);
  std::string good = read_bytes(path);

  SUBCASE("stereo") {
    std::string bad = good;
    bad[22] = 2;  // channel count
    write_bytes(path, bad);
    CHECK_THROWS_WITH_AS(wav_read(path.string()), doctest::Contains("channel"), IoError);
  }

  SUBCASE("non-PCM format code") {
    std::string bad = good;
    bad[20] = 3;
    write_bytes(path, bad);
    CHECK_THROWS_WITH_AS(wav_read(path.string()), doctest::Contains("PCM"), IoError);
  }

  SUBCASE("truncated data chunk") {
    std::string bad = good.substr(0, good.size() - 3);
    write_bytes(path, bad);
    CHECK_THROWS_WITH_AS(wav_read(path.string()), doctest::Contains("data"), IoError);
  }

  SUBCASE("not a wav at all") {
    write_bytes(path, "definitely not riff");
    CHECK_THROWS_AS(wav_read(path.string()), IoError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(wav_read((tmp_file("ged_missing_nope.wav")).string()), IoError);
  }

  fs::remove(path);
}
