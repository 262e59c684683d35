#include "ged/models.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "ged/dsp.hpp"

namespace ged {

std::vector<double> LatentSampler::sample(RngStream& rng) const {
  std::vector<double> z(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double v = rng.normal();
    if (truncation) {
      while (std::fabs(v) > *truncation) v = rng.normal();
    }
    z[i] = v;
  }
  return z;
}

std::pair<Tensor, Tensor> sample_pair(const Generator& gen, std::span<const double> cond,
                                      const LatentSampler& sampler, RngStream& rng_first,
                                      RngStream& rng_second) {
  std::vector<double> z = sampler.sample(rng_first);
  std::vector<double> zp = sampler.sample(rng_second);
  return {gen.forward(cond, z), gen.forward(cond, zp)};
}

std::vector<double> orthogonal_init(std::size_t rows, std::size_t cols, RngStream& rng) {
  // Orthonormalize along the shorter side; re-draw a row on numerical
  // degeneracy (vanishing residual).
  bool transposed = rows > cols;
  std::size_t r = transposed ? cols : rows;
  std::size_t c = transposed ? rows : cols;
  std::vector<double> q(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (int attempt = 0;; ++attempt) {
      for (std::size_t j = 0; j < c; ++j) q[i * c + j] = rng.normal();
      for (std::size_t p = 0; p < i; ++p) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += q[i * c + j] * q[p * c + j];
        for (std::size_t j = 0; j < c; ++j) q[i * c + j] -= dot * q[p * c + j];
      }
      double norm = 0.0;
      for (std::size_t j = 0; j < c; ++j) norm += q[i * c + j] * q[i * c + j];
      norm = std::sqrt(norm);
      if (norm > 1e-8 || attempt > 8) {
        for (std::size_t j = 0; j < c; ++j) q[i * c + j] /= norm;
        break;
      }
    }
  }
  if (!transposed) return q;
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * cols + i] = q[i * c + j];
  return out;
}

// ---------------------------------------------------------------------------
// MlpGenerator

MlpGenerator::MlpGenerator(std::vector<std::size_t> layer_sizes, Activation act,
                           std::size_t cond_dim, std::size_t latent_dim, RngStream& init_rng)
    : layer_sizes_(std::move(layer_sizes)),
      act_(act),
      cond_dim_(cond_dim),
      latent_dim_(latent_dim) {
  if (layer_sizes_.size() < 2) throw std::invalid_argument("MlpGenerator: need >= 2 layer sizes");
  if (layer_sizes_.front() != cond_dim + latent_dim)
    throw std::invalid_argument("MlpGenerator: input size must equal cond_dim + latent_dim");
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    std::size_t in = layer_sizes_[l], out = layer_sizes_[l + 1];
    std::string base = "layer" + std::to_string(l);
    params_[base + "/W"] = Tensor::matrix(out, in, orthogonal_init(out, in, init_rng), true);
    params_[base + "/b"] = Tensor::from(std::vector<double>(out, 0.0), Shape{out}, true);
  }
}

Tensor MlpGenerator::forward(std::span<const double> cond, std::span<const double> latent) const {
  if (cond.size() != cond_dim_ || latent.size() != latent_dim_)
    throw std::invalid_argument("MlpGenerator::forward: dimension mismatch");
  std::vector<double> input;
  input.reserve(cond.size() + latent.size());
  input.insert(input.end(), cond.begin(), cond.end());
  input.insert(input.end(), latent.begin(), latent.end());
  Tensor h = Tensor::vector(std::move(input));
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    std::string base = "layer" + std::to_string(l);
    h = affine(params_.at(base + "/W"), h, params_.at(base + "/b"));
    if (l + 2 < layer_sizes_.size())
      h = act_ == Activation::kRelu ? relu(h) : ged::tanh(h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// IstftGenerator

namespace {

/// Windowed inverse-DFT synthesis map for window 2C, transposed to
/// (2C-1) x 2C so frame rows (T x 2C-1) produce time rows (T x 2C).
/// Coefficient order: DC real, then (Re_i, Im_i) pairs for bins 1..C-1.
/// The Nyquist bin carries no channel and stays zero.
Tensor synthesis_matrix_t(std::size_t chunk) {
  static std::mutex mu;
  static std::map<std::size_t, Tensor> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(chunk);
  if (it != cache.end()) return it->second;

  const std::size_t w = 2 * chunk;
  const std::size_t n_coef = 2 * chunk - 1;
  std::vector<double> win = dsp::hann_window(w);
  std::vector<double> mt(n_coef * w, 0.0);
  for (std::size_t n = 0; n < w; ++n) {
    double scale = win[n] / static_cast<double>(w);
    mt[0 * w + n] = scale;  // DC real
    for (std::size_t i = 1; i < chunk; ++i) {
      double phase = 2.0 * M_PI * static_cast<double>(i) * static_cast<double>(n) /
                     static_cast<double>(w);
      mt[(2 * i - 1) * w + n] = scale * 2.0 * std::cos(phase);
      mt[(2 * i) * w + n] = scale * (-2.0) * std::sin(phase);
    }
  }
  Tensor t = Tensor::matrix(n_coef, w, std::move(mt));
  cache.emplace(chunk, t);
  return t;
}

Tensor channel_layout_const(std::span<const double> flat, std::size_t dim, std::size_t n_chunks) {
  // Incoming layout is chunk major (n_chunks x dim); the conv stack wants
  // channels x time.
  std::vector<double> v(dim * n_chunks);
  for (std::size_t t = 0; t < n_chunks; ++t)
    for (std::size_t d = 0; d < dim; ++d) v[d * n_chunks + t] = flat[t * dim + d];
  return Tensor::matrix(dim, n_chunks, std::move(v));
}

}  // namespace

IstftGenerator::IstftGenerator(const Config& cfg, RngStream& init_rng) : cfg_(cfg) {
  if (cfg_.chunk_size == 0 || cfg_.n_blocks == 0 || cfg_.hidden_channels == 0 ||
      cfg_.bottleneck_channels == 0 || cfg_.cond_dim == 0 || cfg_.latent_dim == 0)
    throw std::invalid_argument("IstftGenerator: all config fields must be positive");
  if (cfg_.n_chunks < 2) throw std::invalid_argument("IstftGenerator: need n_chunks >= 2");

  auto conv_param = [&](const std::string& name, std::size_t out_ch, std::size_t in_ch,
                        std::size_t ks) {
    params_[name + "/W"] = Tensor::from(orthogonal_init(out_ch, in_ch * ks, init_rng),
                                        Shape{out_ch, in_ch, ks}, true);
    params_[name + "/b"] = Tensor::from(std::vector<double>(out_ch, 0.0), Shape{out_ch}, true);
  };
  auto modulation_param = [&](const std::string& name, std::size_t channels) {
    // Zero init so conditioning starts as the identity (gain 1, shift 0).
    params_[name + "/gain/W"] =
        Tensor::matrix(channels, cfg_.cond_dim, std::vector<double>(channels * cfg_.cond_dim, 0.0),
                       true);
    params_[name + "/gain/b"] = Tensor::from(std::vector<double>(channels, 0.0), Shape{channels}, true);
    params_[name + "/shift/W"] =
        Tensor::matrix(channels, cfg_.cond_dim, std::vector<double>(channels * cfg_.cond_dim, 0.0),
                       true);
    params_[name + "/shift/b"] = Tensor::from(std::vector<double>(channels, 0.0), Shape{channels}, true);
  };

  conv_param("stem", cfg_.hidden_channels, cfg_.cond_dim + cfg_.latent_dim, 1);
  for (std::size_t bl = 0; bl < cfg_.n_blocks; ++bl) {
    std::string base = "block" + std::to_string(bl);
    modulation_param(base + "/mod0", cfg_.hidden_channels);
    conv_param(base + "/down", cfg_.bottleneck_channels, cfg_.hidden_channels, 1);
    modulation_param(base + "/mod1", cfg_.bottleneck_channels);
    conv_param(base + "/conv1", cfg_.bottleneck_channels, cfg_.bottleneck_channels, 5);
    modulation_param(base + "/mod2", cfg_.bottleneck_channels);
    conv_param(base + "/conv2", cfg_.bottleneck_channels, cfg_.bottleneck_channels, 5);
    modulation_param(base + "/mod3", cfg_.bottleneck_channels);
    conv_param(base + "/up", cfg_.hidden_channels, cfg_.bottleneck_channels, 1);
  }
  conv_param("proj", 2 * cfg_.chunk_size, cfg_.hidden_channels, 1);
}

std::size_t IstftGenerator::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.numel();
  return n;
}

Tensor IstftGenerator::forward(std::span<const double> cond,
                               std::span<const double> latent) const {
  if (cond.size() != cond_size() || latent.size() != latent_size())
    throw std::invalid_argument("IstftGenerator::forward: dimension mismatch");
  const std::size_t T = cfg_.n_chunks;
  const std::size_t C = cfg_.chunk_size;

  Tensor cm = channel_layout_const(cond, cfg_.cond_dim, T);
  Tensor zm = channel_layout_const(latent, cfg_.latent_dim, T);

  auto modulate = [&](const Tensor& h, const std::string& name) {
    const Tensor& gw = params_.at(name + "/gain/W");
    const Tensor& gb = params_.at(name + "/gain/b");
    const Tensor& sw = params_.at(name + "/shift/W");
    const Tensor& sb = params_.at(name + "/shift/b");
    std::size_t ch = gw.rows();
    Tensor gain = add(add(matmul(gw, cm), reshape(gb, Shape{ch, 1})), Tensor::scalar(1.0));
    Tensor shift = add(matmul(sw, cm), reshape(sb, Shape{ch, 1}));
    return add(mul(h, gain), shift);
  };
  auto conv = [&](const Tensor& h, const std::string& name) {
    return conv1d(h, params_.at(name + "/W"), params_.at(name + "/b"));
  };

  Tensor h = conv(concat_rows(cm, zm), "stem");
  for (std::size_t bl = 0; bl < cfg_.n_blocks; ++bl) {
    std::string base = "block" + std::to_string(bl);
    Tensor r = h;
    Tensor u = conv(leaky_relu(modulate(h, base + "/mod0")), base + "/down");
    u = conv(leaky_relu(modulate(u, base + "/mod1")), base + "/conv1");
    u = conv(leaky_relu(modulate(u, base + "/mod2")), base + "/conv2");
    u = conv(leaky_relu(modulate(u, base + "/mod3")), base + "/up");
    h = add(r, u);
  }
  Tensor proj = conv(h, "proj");  // (2C) x T

  Tensor scale = exp(slice_rows(proj, 0, 1));          // 1 x T
  Tensor coefs = slice_rows(proj, 1, 2 * C);           // (2C-1) x T
  Tensor scaled = mul(coefs, scale);                   // broadcast over rows
  Tensor frames = matmul(transpose(scaled), synthesis_matrix_t(C));  // T x 2C

  Tensor oa = overlap_add(frames, C);  // length (T+1)*C
  std::vector<double> env = dsp::overlap_envelope(2 * C, C, T);
  for (double& e : env) e = 1.0 / std::max(e, 1e-12);
  Tensor wave = mul(oa, Tensor::vector(std::move(env)));
  std::size_t front = C / 2;
  return slice_rows(wave, front, front + T * C);
}

// ---------------------------------------------------------------------------
// LocationScaleModel

LocationScaleModel::LocationScaleModel(double mu0, double sigma0) {
  params_["mu"] = Tensor::scalar(mu0, true);
  params_["sigma"] = Tensor::scalar(sigma0, true);
}

Tensor LocationScaleModel::forward(std::span<const double> cond,
                                   std::span<const double> latent) const {
  if (!cond.empty() || latent.size() != 1)
    throw std::invalid_argument("LocationScaleModel::forward: expects empty cond, 1-D latent");
  Tensor z = Tensor::scalar(latent[0]);
  return add(params_.at("mu"), mul(params_.at("sigma"), z));
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'G', 'E', 'D', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_pod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error(std::string("checkpoint: truncated ") + what);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const GeneratorParams& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  for (const auto& [name, t] : params) {
    if (name.size() > 0xffff) throw std::invalid_argument("checkpoint: name too long");
    write_pod(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<long>(name.size()));
    write_pod(os, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) write_pod(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.values().data()),
             static_cast<long>(t.numel() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

GeneratorParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path);
  auto version = read_pod<std::uint32_t>(is, "version");
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");

  GeneratorParams params;
  while (true) {
    std::uint16_t name_len;
    is.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (is.eof()) break;
    if (!is) throw std::runtime_error("checkpoint: truncated name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::runtime_error("checkpoint: truncated name");
    auto rank = read_pod<std::uint8_t>(is, "rank");
    Shape shape(rank);
    std::size_t numel = 1;
    for (std::size_t d = 0; d < rank; ++d) {
      shape[d] = read_pod<std::uint32_t>(is, "dims");
      numel *= shape[d];
    }
    std::vector<double> values(numel);
    is.read(reinterpret_cast<char*>(values.data()), static_cast<long>(numel * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor values");
    params[name] = Tensor::from(std::move(values), std::move(shape), true);
  }
  return params;
}

}  // namespace ged
