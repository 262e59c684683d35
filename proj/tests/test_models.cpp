#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ged/models.hpp"
#include "ged/spectral.hpp"

using namespace ged;

TEST_CASE("latent sampler determinism and truncation") {
  LatentSampler plain{8, std::nullopt};
  RngStream r1(42), r2(42);
  auto a = plain.sample(r1);
  auto b = plain.sample(r2);
  CHECK(a == b);

  LatentSampler trunc{512, 2.0};
  RngStream r3(7);
  auto z = trunc.sample(r3);
  for (double v : z) CHECK(std::fabs(v) <= 2.0);
}

TEST_CASE("orthogonal init produces orthonormal rows") {
  RngStream rng(1);
  auto w = orthogonal_init(4, 9, rng);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 9; ++k) dot += w[i * 9 + k] * w[j * 9 + k];
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("mlp generator basics") {
  RngStream rng(2);
  MlpGenerator g({6, 16, 3}, MlpGenerator::Activation::kRelu, 2, 4, rng);

  std::vector<double> c = {0.5, -0.5};
  std::vector<double> z = {1.0, 0.0, -1.0, 0.3};
  Tensor y1 = g.forward(c, z);
  Tensor y2 = g.forward(c, z);
  CHECK(y1.numel() == 3);
  CHECK(y1.values() == y2.values());

  // zeroed parameters map everything to zero
  for (auto& [name, p] : g.params())
    std::fill(p.mutable_values().begin(), p.mutable_values().end(), 0.0);
  Tensor y0 = g.forward(c, z);
  for (double v : y0.values()) CHECK(v == 0.0);

  std::vector<double> bad_z = {1.0};
  CHECK_THROWS_AS(g.forward(c, bad_z), std::invalid_argument);
  CHECK_THROWS_AS(MlpGenerator({5, 4, 2}, MlpGenerator::Activation::kRelu, 2, 4, rng),
                  std::invalid_argument);
}

TEST_CASE("sample_pair draws two independent samples under the same conditioning") {
  RngStream init(3);
  MlpGenerator g({4, 8, 2}, MlpGenerator::Activation::kTanh, 0, 4, init);
  LatentSampler sampler{4, std::nullopt};
  std::vector<double> c;

  RngStream rz(100), rzp(101);
  auto [y, yp] = sample_pair(g, c, sampler, rz, rzp);
  bool any_diff = false;
  for (std::size_t i = 0; i < y.numel(); ++i) any_diff = any_diff || y.values()[i] != yp.values()[i];
  CHECK(any_diff);

  RngStream ra(55), rb(55);
  auto [u, up] = sample_pair(g, c, sampler, ra, rb);
  CHECK(u.values() == up.values());
}

TEST_CASE("istft generator output length and zero projection") {
  IstftGenerator::Config cfg;
  cfg.chunk_size = 16;
  cfg.n_blocks = 2;
  cfg.hidden_channels = 24;
  cfg.bottleneck_channels = 8;
  cfg.cond_dim = 1;
  cfg.latent_dim = 4;
  cfg.n_chunks = 25;
  RngStream rng(4);
  IstftGenerator g(cfg, rng);

  std::vector<double> c(cfg.n_chunks, 0.3);
  std::vector<double> z(cfg.n_chunks * cfg.latent_dim, 0.1);
  Tensor y = g.forward(c, z);
  CHECK(y.numel() == 25 * 16);

  auto& w = g.params().at("proj/W").mutable_values();
  auto& b = g.params().at("proj/b").mutable_values();
  std::fill(w.begin(), w.end(), 0.0);
  std::fill(b.begin(), b.end(), 0.0);
  Tensor y0 = g.forward(c, z);
  for (double v : y0.values()) CHECK(v == 0.0);

  CHECK_THROWS_AS(g.forward(std::vector<double>(3, 0.0), z), std::invalid_argument);
}

TEST_CASE("istft generator waveform is linear in the coefficients") {
  IstftGenerator::Config cfg;
  cfg.chunk_size = 8;
  cfg.n_blocks = 1;
  cfg.hidden_channels = 12;
  cfg.bottleneck_channels = 6;
  cfg.cond_dim = 1;
  cfg.latent_dim = 3;
  cfg.n_chunks = 6;
  RngStream rng(5);
  IstftGenerator g(cfg, rng);

  std::vector<double> c(cfg.n_chunks, -0.2);
  std::vector<double> z(cfg.n_chunks * cfg.latent_dim, 0.4);
  Tensor y1 = g.forward(c, z);
  // +log 2 on the scale channel bias doubles every coefficient, hence the
  // waveform, exactly up to rounding.
  g.params().at("proj/b").mutable_values()[0] += std::log(2.0);
  Tensor y2 = g.forward(c, z);
  for (std::size_t i = 0; i < y1.numel(); ++i)
    CHECK(y2.values()[i] == doctest::Approx(2.0 * y1.values()[i]).epsilon(1e-12));
}

TEST_CASE("istft generator gradients match finite differences on a tiny instance") {
  IstftGenerator::Config cfg;
  cfg.chunk_size = 4;
  cfg.n_blocks = 1;
  cfg.hidden_channels = 6;
  cfg.bottleneck_channels = 3;
  cfg.cond_dim = 1;
  cfg.latent_dim = 2;
  cfg.n_chunks = 3;
  RngStream rng(6);
  IstftGenerator g(cfg, rng);

  std::vector<double> c = {0.1, 0.5, -0.3};
  std::vector<double> z(cfg.n_chunks * cfg.latent_dim);
  RngStream zr(7);
  for (auto& v : z) v = zr.normal();
  std::vector<double> target(cfg.n_chunks * cfg.chunk_size);
  RngStream tr(8);
  for (auto& v : target) v = tr.normal() * 0.2;

  DistanceConfig dcfg;
  dcfg.window_lens = {8};
  dcfg.oversample = 2;

  for (auto& [name, p] : g.params()) {
    auto f = [&](const Tensor&) {
      Tensor y = g.forward(c, z);
      return multiscale_distance_node(Tensor::vector(target), y, dcfg);
    };
    INFO("param " << name);
    CHECK(grad_check(f, p, 1e-5) < 1e-4);
  }
}

TEST_CASE("desk-scale istft generator stays under the parameter budget") {
  IstftGenerator::Config cfg;  // defaults: C=16, 4 blocks, 128/32 channels
  RngStream rng(9);
  IstftGenerator g(cfg, rng);
  CHECK(g.parameter_count() < 1000000);
}

TEST_CASE("location-scale model") {
  LocationScaleModel g(1.5, 0.5);
  std::vector<double> z = {2.0};
  Tensor y = g.forward({}, z);
  CHECK(y.item() == doctest::Approx(1.5 + 0.5 * 2.0));
  CHECK(g.mu() == 1.5);
  CHECK(g.sigma() == 0.5);
}

TEST_CASE("checkpoint round trip is bit exact") {
  namespace fs = std::filesystem;
  RngStream rng(10);
  MlpGenerator g({4, 8, 2}, MlpGenerator::Activation::kRelu, 0, 4, rng);
  fs::path path = fs::temp_directory_path() / "ged_test_ckpt.bin";

  save_checkpoint(path.string(), g.params());
  GeneratorParams loaded = load_checkpoint(path.string());
  REQUIRE(loaded.size() == g.params().size());
  for (const auto& [name, p] : g.params()) {
    REQUIRE(loaded.count(name) == 1);
    CHECK(loaded.at(name).shape() == p.shape());
    CHECK(loaded.at(name).values() == p.values());
  }

  // re-saving the loaded params produces identical bytes
  fs::path path2 = fs::temp_directory_path() / "ged_test_ckpt2.bin";
  save_checkpoint(path2.string(), loaded);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);

  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("checkpoint loader rejects corrupt files") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "ged_test_bad_ckpt.bin";
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTAMAGIC....";
  }
  CHECK_THROWS(load_checkpoint(path.string()));
  fs::remove(path);
}
