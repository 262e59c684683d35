#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ged/autodiff.hpp"
#include "ged/rng.hpp"

namespace ged {

/// Distance induced by a symmetric kernel: (k(x,x) + k(y,y) - 2 k(x,y)) / 2.
template <class S, class K>
double kernel_to_distance(K&& kernel, const S& x, const S& y) {
  return 0.5 * (kernel(x, x) + kernel(y, y) - 2.0 * kernel(x, y));
}

/// Unbiased U-statistic estimate of the squared MMD:
///   mean_{n != n'} k(x_n, x_n') + mean_{m != m'} k(y_m, y_m')
///   - 2 * mean_{n,m} k(x_n, y_m).
template <class S, class K>
double mmd2_ustat(const std::vector<S>& xs, const std::vector<S>& ys, K&& kernel) {
  const std::size_t n = xs.size(), m = ys.size();
  if (n < 2 || m < 2) throw std::invalid_argument("mmd2_ustat: need at least 2 samples per batch");
  double within_x = 0.0, within_y = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) within_x += kernel(xs[i], xs[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) within_y += kernel(ys[i], ys[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cross += kernel(xs[i], ys[j]);
  return within_x / (static_cast<double>(n) * static_cast<double>(n - 1)) +
         within_y / (static_cast<double>(m) * static_cast<double>(m - 1)) -
         2.0 * cross / (static_cast<double>(n) * static_cast<double>(m));
}

/// U-statistic estimate of E[2 d(x,y) - d(x,x') - d(y,y')] with distinct-pair
/// within-batch terms.
template <class S, class D>
double ged_population_estimate(const std::vector<S>& xs, const std::vector<S>& ys, D&& dist) {
  const std::size_t n = xs.size(), m = ys.size();
  if (n < 2 || m < 2)
    throw std::invalid_argument("ged_population_estimate: need at least 2 samples per batch");
  double within_x = 0.0, within_y = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) within_x += dist(xs[i], xs[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) within_y += dist(ys[i], ys[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cross += dist(xs[i], ys[j]);
  return 2.0 * cross / (static_cast<double>(n) * static_cast<double>(m)) -
         within_x / (static_cast<double>(n) * static_cast<double>(n - 1)) -
         within_y / (static_cast<double>(m) * static_cast<double>(m - 1));
}

/// Single-draw estimate of the energy score: 2 d(x,y) - d(y,y').
template <class S, class D>
double energy_score(const S& x, const S& y, const S& y_prime, D&& dist) {
  return 2.0 * dist(x, y) - dist(y, y_prime);
}

/// Loss configuration: whether the repulsive term -d(y_i, y_i') is included,
/// plus the metric handle. checked() probes the handle for symmetry and
/// non-negativity on random pairs drawn from the supplied items.
template <class S>
struct GedLossConfig {
  bool repulsive = true;
  std::function<double(const S&, const S&)> distance;

  static GedLossConfig checked(std::function<double(const S&, const S&)> dist, bool repulsive,
                               const std::vector<S>& probe_items, std::uint64_t seed = 17) {
    if (!dist) throw std::invalid_argument("GedLossConfig: null distance");
    if (probe_items.size() >= 2) {
      RngStream rng(seed);
      for (int p = 0; p < 16; ++p) {
        std::size_t i = rng.next_u64() % probe_items.size();
        std::size_t j = rng.next_u64() % probe_items.size();
        double dij = dist(probe_items[i], probe_items[j]);
        double dji = dist(probe_items[j], probe_items[i]);
        if (!(dij >= 0.0) || !(dji >= 0.0))
          throw std::invalid_argument("GedLossConfig: distance produced a negative value");
        if (std::fabs(dij - dji) > 1e-9 * std::max(1.0, std::fabs(dij)))
          throw std::invalid_argument("GedLossConfig: distance is not symmetric");
      }
    }
    GedLossConfig cfg;
    cfg.repulsive = repulsive;
    cfg.distance = std::move(dist);
    return cfg;
  }
};

/// Minibatch training loss: sum_i [ 2 d(x_i, y_i) - 1[repulsive] d(y_i, y_i') ].
template <class S>
double minibatch_ged_loss(const std::vector<S>& xs, const std::vector<S>& ys,
                          const std::vector<S>& ys_prime, const GedLossConfig<S>& cfg) {
  if (xs.empty() || xs.size() != ys.size() || ys.size() != ys_prime.size())
    throw std::invalid_argument("minibatch_ged_loss: batch lengths must match and be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    total += 2.0 * cfg.distance(xs[i], ys[i]);
    if (cfg.repulsive) total -= cfg.distance(ys[i], ys_prime[i]);
  }
  return total;
}

/// ||x-y||_alpha^beta. Proper scoring requires alpha in (0,2] and
/// beta in (0,alpha]; out-of-range values need the explicit override.
double power_distance(std::span<const double> x, std::span<const double> y, double alpha,
                      double beta, bool allow_improper = false);

/// Metric handle in graph form, used to build the differentiable loss.
using DistanceNodeFn = std::function<Tensor(const Tensor&, const Tensor&)>;

/// Euclidean distance node ||a-b||_2 (1e-12 floor under the square root).
Tensor euclidean_distance_node(const Tensor& a, const Tensor& b);

/// Graph form of the minibatch loss; returns the pair of summed attract and
/// repulse terms so callers can report the decomposition. loss = attract -
/// repulse (repulse is a defined zero scalar when repulsive is off).
struct GedLossNodes {
  Tensor attract;
  Tensor repulse;
  Tensor loss;
};
GedLossNodes minibatch_ged_loss_node(const std::vector<Tensor>& xs, const std::vector<Tensor>& ys,
                                     const std::vector<Tensor>& ys_prime,
                                     const DistanceNodeFn& dist, bool repulsive);

}  // namespace ged
