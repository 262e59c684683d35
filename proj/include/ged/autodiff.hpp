#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ged {

using Shape = std::vector<std::size_t>;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // allocated on demand during backward
  bool requires_grad = false;
  bool needs_grad = false;  // some requires_grad leaf is reachable below
  bool backward_done = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  std::size_t numel() const { return values.size(); }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

/// Shaped double-precision array participating in the differentiation graph.
/// Tensors are cheap shared handles; ops below build the graph, backward()
/// accumulates d(loss)/d(tensor) into .grad() of every requires_grad leaf.
class Tensor {
 public:
  Tensor() = default;

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor from(std::vector<double> values, Shape shape, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);
  static Tensor zeros(const Shape& shape, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->numel(); }
  std::size_t rows() const;
  std::size_t cols() const;

  const std::vector<double>& values() const { return node_->values; }
  /// Mutable access, intended for leaves (parameters, grad_check probes).
  std::vector<double>& mutable_values() { return node_->values; }
  const std::vector<double>& grad() const;
  bool requires_grad() const { return node_->requires_grad; }

  /// Value of a single-element tensor.
  double item() const;

  void zero_grad();

  detail::Node* node() const { return node_.get(); }

 private:
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_op(Shape shape, std::vector<double> values,
                        std::vector<Tensor> parents, std::function<void(detail::Node&)> bp);
};

// Elementwise binary ops. Broadcasting: identical shapes, a one-element
// operand against anything, or rank-2 (r,1)/(1,c) against (r,c).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor sub(double a, const Tensor& b);
Tensor mul(const Tensor& a, double b);

// Elementwise unary ops. abs uses the sign(0) = 0 subgradient convention.
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.2);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor neg(const Tensor& x);

// Reductions to a scalar.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Structure ops.
Tensor matmul(const Tensor& a, const Tensor& b);
/// W (n x k) * x (k) + b (n) for a vector input.
Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b);
/// x: (in_ch, len) row major; w: (out_ch, in_ch, ksize) with odd ksize;
/// b: (out_ch). Stride 1, zero-padded to the same length.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor concat_rows(const Tensor& a, const Tensor& b);
/// Rows [begin, end) of a matrix, or elements [begin, end) of a vector.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
/// Sliding frames of a 1-D signal: row t = x[t*hop .. t*hop + k).
Tensor frame_extract(const Tensor& x, std::size_t k, std::size_t hop);
/// Adjoint of frame_extract: out[t*hop + n] += frames[t][n].
Tensor overlap_add(const Tensor& frames, std::size_t hop);
/// Per-row Euclidean norm with an eps floor under the square root.
Tensor l2_norm_rows(const Tensor& x, double eps = 1e-12);

/// Reverse-mode sweep from a scalar loss. Repeated calls on the same loss
/// without reset_backward() are rejected.
void backward(const Tensor& loss);

/// Clears grads and the backward-done flag across the graph below `loss`.
void reset_backward(const Tensor& loss);

/// Central-difference check of d f / d x. Returns the max relative error with
/// denominator max(|analytic|, |numeric|, 1e-8). f must rebuild its graph from
/// x on every call.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double h = 1e-5);

}  // namespace ged
