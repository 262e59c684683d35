#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ged/autodiff.hpp"
#include "ged/rng.hpp"

namespace ged {

/// Trainable tensors of a generator, addressable by stable names.
using GeneratorParams = std::map<std::string, Tensor>;

/// i.i.d. standard normal latents; coordinates with |z| > truncation are
/// redrawn when a truncation is configured.
struct LatentSampler {
  std::size_t dim = 0;
  std::optional<double> truncation;

  std::vector<double> sample(RngStream& rng) const;
};

/// Implicit generator interface: y = f_theta(c, z), built as a graph so the
/// loss can backpropagate into params().
class Generator {
 public:
  virtual ~Generator() = default;
  /// Total conditioning values consumed per example (may be 0).
  virtual std::size_t cond_size() const = 0;
  /// Total latent values consumed per example.
  virtual std::size_t latent_size() const = 0;
  virtual Tensor forward(std::span<const double> cond, std::span<const double> latent) const = 0;
  virtual GeneratorParams& params() = 0;
  const GeneratorParams& params() const { return const_cast<Generator*>(this)->params_const(); }

 protected:
  virtual const GeneratorParams& params_const() const = 0;
};

/// Fully connected generator for the low-dimensional experiments.
class MlpGenerator : public Generator {
 public:
  enum class Activation { kRelu, kTanh };

  /// layer_sizes[0] must equal cond_dim + latent_dim.
  MlpGenerator(std::vector<std::size_t> layer_sizes, Activation act, std::size_t cond_dim,
               std::size_t latent_dim, RngStream& init_rng);

  std::size_t cond_size() const override { return cond_dim_; }
  std::size_t latent_size() const override { return latent_dim_; }
  Tensor forward(std::span<const double> cond, std::span<const double> latent) const override;
  GeneratorParams& params() override { return params_; }

 protected:
  const GeneratorParams& params_const() const override { return params_; }

 private:
  std::vector<std::size_t> layer_sizes_;
  Activation act_;
  std::size_t cond_dim_, latent_dim_;
  GeneratorParams params_;
};

/// Residual 1-D conv stack that emits per-chunk Fourier coefficients and maps
/// them to a waveform with a windowed overlap-add inverse transform (window
/// 2C, hop C). Channel 0 of the final projection passes through exp() and
/// scales the remaining 2C-1 coefficient channels.
class IstftGenerator : public Generator {
 public:
  struct Config {
    std::size_t chunk_size = 16;  // C; paper-scale preset uses 120
    std::size_t n_blocks = 4;     // paper-scale 12
    std::size_t hidden_channels = 128;      // paper-scale 2048
    std::size_t bottleneck_channels = 32;   // paper-scale 512
    std::size_t cond_dim = 1;
    std::size_t latent_dim = 32;
    std::size_t n_chunks = 32;  // output length = n_chunks * C
  };

  IstftGenerator(const Config& cfg, RngStream& init_rng);

  std::size_t cond_size() const override { return cfg_.cond_dim * cfg_.n_chunks; }
  std::size_t latent_size() const override { return cfg_.latent_dim * cfg_.n_chunks; }
  Tensor forward(std::span<const double> cond, std::span<const double> latent) const override;
  GeneratorParams& params() override { return params_; }
  const Config& config() const { return cfg_; }
  std::size_t parameter_count() const;

 protected:
  const GeneratorParams& params_const() const override { return params_; }

 private:
  Config cfg_;
  GeneratorParams params_;
};

/// 1-D location-scale family y = mu + sigma * z.
class LocationScaleModel : public Generator {
 public:
  LocationScaleModel(double mu0, double sigma0);

  std::size_t cond_size() const override { return 0; }
  std::size_t latent_size() const override { return 1; }
  Tensor forward(std::span<const double> cond, std::span<const double> latent) const override;
  GeneratorParams& params() override { return params_; }
  double mu() const { return params_.at("mu").values()[0]; }
  double sigma() const { return params_.at("sigma").values()[0]; }

 protected:
  const GeneratorParams& params_const() const override { return params_; }

 private:
  GeneratorParams params_;
};

/// Two forward passes with independent latent draws under identical
/// conditioning and parameters.
std::pair<Tensor, Tensor> sample_pair(const Generator& gen, std::span<const double> cond,
                                      const LatentSampler& sampler, RngStream& rng_first,
                                      RngStream& rng_second);

/// Row- (or column-) orthonormal matrix init via Gram-Schmidt on a Gaussian
/// draw.
std::vector<double> orthogonal_init(std::size_t rows, std::size_t cols, RngStream& rng);

/// Flat binary checkpoint: magic "GEDCKPT1", version u32, then per tensor
/// (name_len u16, name, rank u8, dims u32 each, values f64), little endian.
/// Round-trips bit exactly.
void save_checkpoint(const std::string& path, const GeneratorParams& params);
GeneratorParams load_checkpoint(const std::string& path);

}  // namespace ged
