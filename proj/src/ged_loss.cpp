#include "ged/ged_loss.hpp"

#include <cmath>
#include <stdexcept>

namespace ged {

double power_distance(std::span<const double> x, std::span<const double> y, double alpha,
                      double beta, bool allow_improper) {
  if (x.size() != y.size()) throw std::invalid_argument("power_distance: dimension mismatch");
  if (!allow_improper && (alpha <= 0.0 || alpha > 2.0 || beta <= 0.0 || beta > alpha))
    throw std::invalid_argument(
        "power_distance: need alpha in (0,2] and beta in (0,alpha] (or the override flag)");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(std::fabs(x[i] - y[i]), alpha);
  double norm = std::pow(acc, 1.0 / alpha);
  return std::pow(norm, beta);
}

Tensor euclidean_distance_node(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel())
    throw std::invalid_argument("euclidean_distance_node: dimension mismatch");
  Tensor diff = sub(a, b);
  Tensor row = reshape(diff, Shape{1, diff.numel()});
  return sum(l2_norm_rows(row, 1e-12));
}

GedLossNodes minibatch_ged_loss_node(const std::vector<Tensor>& xs, const std::vector<Tensor>& ys,
                                     const std::vector<Tensor>& ys_prime,
                                     const DistanceNodeFn& dist, bool repulsive) {
  if (xs.empty() || xs.size() != ys.size() || ys.size() != ys_prime.size())
    throw std::invalid_argument("minibatch_ged_loss_node: batch lengths must match and be >= 1");
  GedLossNodes out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Tensor attract_i = mul(dist(xs[i], ys[i]), 2.0);
    out.attract = out.attract.defined() ? add(out.attract, attract_i) : attract_i;
    if (repulsive) {
      Tensor repulse_i = dist(ys[i], ys_prime[i]);
      out.repulse = out.repulse.defined() ? add(out.repulse, repulse_i) : repulse_i;
    }
  }
  if (!repulsive) out.repulse = Tensor::scalar(0.0);
  out.loss = repulsive ? sub(out.attract, out.repulse) : out.attract;
  return out;
}

}  // namespace ged
