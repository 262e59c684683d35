#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ged/dsp.hpp"
#include "ged/rng.hpp"
#include "oracles.hpp"

using namespace ged;

namespace {

Waveform random_wave(std::size_t n, std::uint64_t seed, int sr = 8000) {
  RngStream rng(seed);
  Waveform w;
  w.sample_rate_hz = sr;
  w.samples.resize(n);
  for (auto& s : w.samples) s = rng.normal() * 0.3;
  return w;
}

}  // namespace

TEST_CASE("hann_window closed-form values") {
  auto w4 = dsp::hann_window(4);
  REQUIRE(w4.size() == 4);
  CHECK(w4[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w4[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w4[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w4[3] == doctest::Approx(0.5).epsilon(1e-15));

  auto w1 = dsp::hann_window(1);
  CHECK(w1[0] == doctest::Approx(0.0));

  CHECK_THROWS_AS(dsp::hann_window(0), std::invalid_argument);
}

TEST_CASE("hann_window 50% overlap sums to one at interior samples") {
  const std::size_t n = 8;
  auto w = dsp::hann_window(n);
  for (std::size_t i = 0; i < n / 2; ++i)
    CHECK(w[i] + w[i + n / 2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stft_magnitude zero signal gives zero matrix of the right shape") {
  Waveform x;
  x.sample_rate_hz = 8000;
  x.samples.assign(256, 0.0);
  dsp::StftConfig cfg;
  cfg.window_len = 64;
  cfg.oversample = 1;
  auto spec = dsp::stft_magnitude(x, cfg);
  CHECK(spec.frames == 7);
  CHECK(spec.bins == 33);
  for (double m : spec.magnitudes) CHECK(m == 0.0);
}

TEST_CASE("stft_magnitude bin count with 8x oversampling") {
  Waveform x = random_wave(128, 3);
  dsp::StftConfig cfg;
  cfg.window_len = 64;
  cfg.oversample = 8;
  auto spec = dsp::stft_magnitude(x, cfg);
  CHECK(spec.bins == 257);
}

TEST_CASE("stft_magnitude pure tone peaks at its bin and matches the direct DFT") {
  const std::size_t k = 64;
  Waveform x;
  x.sample_rate_hz = 8000;
  x.samples.resize(256);
  for (std::size_t n = 0; n < x.samples.size(); ++n)
    x.samples[n] = std::cos(2.0 * M_PI * 8.0 * static_cast<double>(n) / 64.0);

  dsp::StftConfig cfg;
  cfg.window_len = k;
  cfg.hop = 32;
  cfg.oversample = 1;
  auto spec = dsp::stft_magnitude(x, cfg);

  std::size_t frames = 0;
  auto win = dsp::hann_window(k);
  auto ref = oracle::dft_spectrogram(x.samples, k, 32, 1, win, &frames);
  REQUIRE(frames == spec.frames);
  for (std::size_t i = 0; i < ref.size(); ++i)
    CHECK(spec.magnitudes[i] == doctest::Approx(ref[i]).epsilon(1e-9));

  for (std::size_t t = 0; t < spec.frames; ++t) {
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < spec.bins; ++i)
      if (spec.at(t, i) > spec.at(t, argmax)) argmax = i;
    CHECK(argmax == 8);
  }
}

TEST_CASE("stft_magnitude matches direct DFT oracle on random signals, any oversampling") {
  for (std::size_t m : {1u, 2u, 8u}) {
    Waveform x = random_wave(300, 100 + m);
    dsp::StftConfig cfg;
    cfg.window_len = 64;
    cfg.oversample = m;
    auto spec = dsp::stft_magnitude(x, cfg);
    std::size_t frames = 0;
    auto win = dsp::hann_window(64);
    auto ref = oracle::dft_spectrogram(x.samples, 64, 32, m, win, &frames);
    double max_err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
      max_err = std::max(max_err, std::fabs(spec.magnitudes[i] - ref[i]));
    CHECK(max_err < 1e-9);
  }
}

TEST_CASE("stft_magnitude is sign-flip invariant") {
  Waveform x = random_wave(200, 7);
  Waveform neg = x;
  for (auto& s : neg.samples) s = -s;
  dsp::StftConfig cfg;
  cfg.window_len = 64;
  cfg.oversample = 2;
  auto sa = dsp::stft_magnitude(x, cfg);
  auto sb = dsp::stft_magnitude(neg, cfg);
  for (std::size_t i = 0; i < sa.magnitudes.size(); ++i)
    CHECK(sa.magnitudes[i] == sb.magnitudes[i]);
}

TEST_CASE("doubling the oversampling preserves values at coincident bins") {
  Waveform x = random_wave(200, 9);
  dsp::StftConfig c1, c2;
  c1.window_len = c2.window_len = 64;
  c1.oversample = 2;
  c2.oversample = 4;
  auto s1 = dsp::stft_magnitude(x, c1);
  auto s2 = dsp::stft_magnitude(x, c2);
  CHECK(s2.bins == 2 * s1.bins - 1);
  for (std::size_t t = 0; t < s1.frames; ++t)
    for (std::size_t i = 0; i < s1.bins; ++i)
      CHECK(s2.at(t, 2 * i) == doctest::Approx(s1.at(t, i)).epsilon(1e-12));
}

TEST_CASE("stft rejects short signals and bad configs") {
  Waveform x = random_wave(32, 11);
  dsp::StftConfig cfg;
  cfg.window_len = 64;
  CHECK_THROWS_AS(dsp::stft_magnitude(x, cfg), std::invalid_argument);
  cfg.center_pad = true;  // padding makes it long enough
  CHECK_NOTHROW(dsp::stft_magnitude(x, cfg));

  dsp::StftConfig odd;
  odd.window_len = 63;
  Waveform y = random_wave(128, 12);
  CHECK_THROWS_AS(dsp::stft_magnitude(y, odd), std::invalid_argument);
}

TEST_CASE("stft_complex basics") {
  SUBCASE("zero signal gives zero coefficients") {
    Waveform x;
    x.sample_rate_hz = 8000;
    x.samples.assign(64, 0.0);
    dsp::StftConfig cfg;
    cfg.window_len = 32;
    cfg.oversample = 1;
    auto fr = dsp::stft_complex(x, cfg);
    for (auto c : fr.coeffs) {
      CHECK(c.real() == 0.0);
      CHECK(c.imag() == 0.0);
    }
  }

  SUBCASE("DC signal: bin 0 real part equals the window sum") {
    Waveform x;
    x.sample_rate_hz = 8000;
    x.samples.assign(4, 1.0);
    dsp::StftConfig cfg;
    cfg.window_len = 4;
    cfg.oversample = 1;
    auto fr = dsp::stft_complex(x, cfg);
    CHECK(fr.at(0, 0).real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fr.at(0, 0).imag() == doctest::Approx(0.0));
  }

  SUBCASE("modulus equals stft_magnitude at m = 1") {
    Waveform x = random_wave(200, 13);
    dsp::StftConfig cfg;
    cfg.window_len = 64;
    cfg.oversample = 1;
    auto fr = dsp::stft_complex(x, cfg);
    auto mag = dsp::stft_magnitude(x, cfg);
    for (std::size_t t = 0; t < fr.frames; ++t)
      for (std::size_t i = 0; i < fr.bins; ++i)
        CHECK(std::abs(fr.at(t, i)) == doctest::Approx(mag.at(t, i)).epsilon(1e-12));
  }

  SUBCASE("oversample other than 1 is rejected") {
    Waveform x = random_wave(128, 14);
    dsp::StftConfig cfg;
    cfg.window_len = 64;
    cfg.oversample = 2;
    CHECK_THROWS_AS(dsp::stft_complex(x, cfg), std::invalid_argument);
  }
}

TEST_CASE("istft_overlap_add round trip reconstructs interior samples") {
  const std::size_t k = 32;
  Waveform x = random_wave(256, 21);
  dsp::StftConfig cfg;
  cfg.window_len = k;
  cfg.oversample = 1;
  auto fr = dsp::stft_complex(x, cfg);
  auto rec = dsp::istft_overlap_add(fr, k, k / 2);
  REQUIRE(rec.size() == (fr.frames - 1) * (k / 2) + k);
  double max_rel = 0.0;
  for (std::size_t n = k; n + k < x.samples.size(); ++n) {
    double denom = std::max(std::fabs(x.samples[n]), 1e-12);
    max_rel = std::max(max_rel, std::fabs(rec[n] - x.samples[n]) / denom);
  }
  CHECK(max_rel < 1e-10);
}

TEST_CASE("istft_overlap_add edge cases") {
  SUBCASE("zero frames give a zero waveform") {
    dsp::ComplexFrames fr;
    fr.window_len = 8;
    fr.frames = 3;
    fr.bins = 5;
    fr.coeffs.assign(15, {0.0, 0.0});
    auto rec = dsp::istft_overlap_add(fr, 8, 4);
    for (double v : rec) CHECK(v == 0.0);
  }

  SUBCASE("single frame output length equals the window") {
    dsp::ComplexFrames fr;
    fr.window_len = 4;
    fr.frames = 1;
    fr.bins = 3;
    fr.coeffs.assign(3, {1.0, 0.0});
    auto rec = dsp::istft_overlap_add(fr, 4, 2);
    CHECK(rec.size() == 4);
  }

  SUBCASE("unsupported hop is rejected") {
    dsp::ComplexFrames fr;
    fr.window_len = 8;
    fr.frames = 2;
    fr.bins = 5;
    fr.coeffs.assign(10, {0.0, 0.0});
    CHECK_THROWS_AS(dsp::istft_overlap_add(fr, 8, 3), std::invalid_argument);
  }
}

TEST_CASE("mel_filterbank structure") {
  const std::size_t bins = 129;
  const std::size_t n_mel = 40;
  auto fb = dsp::mel_filterbank(bins, n_mel, 8000);
  REQUIRE(fb.size() == n_mel * bins);

  double prev_peak = -1.0;
  for (std::size_t j = 0; j < n_mel; ++j) {
    // contiguous support
    std::size_t first = bins, last = 0;
    for (std::size_t b = 0; b < bins; ++b) {
      if (fb[j * bins + b] > 0.0) {
        first = std::min(first, b);
        last = std::max(last, b);
      }
      CHECK(fb[j * bins + b] >= 0.0);
    }
    REQUIRE(first <= last);
    for (std::size_t b = first; b <= last; ++b) CHECK(fb[j * bins + b] > 0.0);

    // increasing peak positions
    std::size_t peak = first;
    for (std::size_t b = first; b <= last; ++b)
      if (fb[j * bins + b] > fb[j * bins + peak]) peak = b;
    CHECK(static_cast<double>(peak) > prev_peak);
    prev_peak = static_cast<double>(peak);
  }

  // flat spectrum maps to strictly positive outputs
  for (std::size_t j = 0; j < n_mel; ++j) {
    double acc = 0.0;
    for (std::size_t b = 0; b < bins; ++b) acc += fb[j * bins + b];
    CHECK(acc > 0.0);
  }

  CHECK_THROWS_AS(dsp::mel_filterbank(16, 16, 8000), std::invalid_argument);
  CHECK_THROWS_AS(dsp::mel_filterbank(16, 20, 8000), std::invalid_argument);
}
