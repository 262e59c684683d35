#include "ged/optim.hpp"

#include <chrono>
#include <cmath>

namespace ged {

double AdamState::lr_at(long step) const {
  if (warmup_steps <= 0) return base_lr;
  double frac = static_cast<double>(step) / static_cast<double>(warmup_steps);
  return base_lr * std::min(1.0, frac);
}

void AdamState::step(GeneratorParams& params) {
  t += 1;
  const double lr = lr_at(t);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (auto& [name, p] : params) {
    std::size_t n = p.numel();
    const std::vector<double>* g = nullptr;
    try {
      g = &p.grad();
    } catch (const std::logic_error&) {
      throw std::logic_error("adam_step: parameter '" + name + "' has no gradient");
    }
    auto& mv = m[name];
    auto& vv = v[name];
    if (mv.size() != n) mv.assign(n, 0.0);
    if (vv.size() != n) vv.assign(n, 0.0);
    auto& values = p.mutable_values();
    for (std::size_t i = 0; i < n; ++i) {
      double gi = (*g)[i];
      mv[i] = beta1 * mv[i] + (1.0 - beta1) * gi;
      vv[i] = beta2 * vv[i] + (1.0 - beta2) * gi * gi;
      double mhat = mv[i] / bc1;
      double vhat = vv[i] / bc2;
      values[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void EmaState::init(const GeneratorParams& params) {
  shadow.clear();
  for (const auto& [name, p] : params) shadow[name] = p.values();
}

void EmaState::update(const GeneratorParams& params) {
  for (const auto& [name, p] : params) {
    auto it = shadow.find(name);
    if (it == shadow.end() || it->second.size() != p.numel())
      throw std::invalid_argument("ema_update: shadow shape mismatch for '" + name + "'");
    auto& s = it->second;
    const auto& v = p.values();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = decay * s[i] + (1.0 - decay) * v[i];
  }
}

const std::vector<double>& EmaState::shadow_of(const std::string& name) const {
  auto it = shadow.find(name);
  if (it == shadow.end()) throw std::invalid_argument("ema: unknown parameter '" + name + "'");
  return it->second;
}

GeneratorParams EmaState::snapshot(const GeneratorParams& like) const {
  GeneratorParams out;
  for (const auto& [name, p] : like)
    out[name] = Tensor::from(shadow_of(name), p.shape(), true);
  return out;
}

StepMetrics train_step(Generator& gen, const std::vector<TrainExample>& batch,
                       const DistanceNodeFn& dist, bool repulsive, const LatentSampler& sampler,
                       AdamState& adam, EmaState* ema, std::uint64_t master_seed, long step) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  auto t0 = std::chrono::steady_clock::now();

  std::vector<Tensor> xs, ys, ys_prime;
  xs.reserve(batch.size());
  ys.reserve(batch.size());
  ys_prime.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    RngStream rz(split_seed(master_seed, static_cast<std::uint64_t>(step), i, kStreamLatent));
    RngStream rzp(
        split_seed(master_seed, static_cast<std::uint64_t>(step), i, kStreamLatentPrime));
    std::vector<double> z = sampler.sample(rz);
    std::vector<double> zp = sampler.sample(rzp);
    xs.push_back(Tensor::vector(batch[i].x));
    ys.push_back(gen.forward(batch[i].c, z));
    ys_prime.push_back(gen.forward(batch[i].c, zp));
  }
  GedLossNodes nodes = minibatch_ged_loss_node(xs, ys, ys_prime, dist, repulsive);

  StepMetrics metrics;
  metrics.step = step;
  metrics.loss = nodes.loss.item();
  metrics.loss_attract = nodes.attract.item();
  metrics.loss_repulse = repulsive ? nodes.repulse.item() : 0.0;
  if (!std::isfinite(metrics.loss)) throw TrainingDiverged(step);

  backward(nodes.loss);
  adam.step(gen.params());
  for (auto& [name, p] : gen.params()) p.zero_grad();
  if (ema) ema->update(gen.params());

  metrics.lr = adam.current_lr();
  auto t1 = std::chrono::steady_clock::now();
  metrics.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return metrics;
}

}  // namespace ged
