#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ged/ged_loss.hpp"
#include "ged/models.hpp"

namespace ged {

/// Raised when a training step produces a non-finite loss.
struct TrainingDiverged : std::runtime_error {
  long step;
  explicit TrainingDiverged(long s)
      : std::runtime_error("training diverged at step " + std::to_string(s)), step(s) {}
};

/// Adam with bias correction and linear learning-rate warmup:
/// lr_t = base_lr * min(1, t / warmup_steps).
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double base_lr = 3e-4;
  long warmup_steps = 6000;

  long t = 0;
  std::map<std::string, std::vector<double>> m, v;

  double lr_at(long step) const;
  double current_lr() const { return lr_at(t); }

  /// One update from the grads currently accumulated on the params.
  void step(GeneratorParams& params);
};

/// Exponential moving average of parameters, shadow <- decay*shadow + (1-decay)*param.
struct EmaState {
  double decay = 0.9999;
  std::map<std::string, std::vector<double>> shadow;

  void init(const GeneratorParams& params);
  void update(const GeneratorParams& params);
  const std::vector<double>& shadow_of(const std::string& name) const;
  /// Copies the shadow values into a parameter map of the same structure.
  GeneratorParams snapshot(const GeneratorParams& like) const;
};

/// One observed example: data vector x plus conditioning features c.
struct TrainExample {
  std::vector<double> x;
  std::vector<double> c;
};

struct StepMetrics {
  long step = 0;
  double loss = 0.0;
  double loss_attract = 0.0;
  double loss_repulse = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

/// One two-sample energy-distance update: per example draws independent
/// latents (z, z') from per-(step, example) streams, generates (y, y'),
/// builds the summed minibatch loss, backpropagates, applies Adam and EMA.
StepMetrics train_step(Generator& gen, const std::vector<TrainExample>& batch,
                       const DistanceNodeFn& dist, bool repulsive, const LatentSampler& sampler,
                       AdamState& adam, EmaState* ema, std::uint64_t master_seed, long step);

}  // namespace ged
