#include "ged/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ged {

namespace {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

[[noreturn]] void shape_error(const char* op) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes");
}

}  // namespace

Tensor make_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
               std::function<void(detail::Node&)> bp) {
  Tensor t;
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->parents.reserve(parents.size());
  for (const Tensor& p : parents) {
    node->parents.push_back(p.node_);
    node->needs_grad = node->needs_grad || p.node_->needs_grad;
  }
  node->backprop = std::move(bp);
  t.node_ = std::move(node);
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({v}, Shape{}, requires_grad);
}

Tensor Tensor::from(std::vector<double> values, Shape shape, bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw std::invalid_argument("Tensor: values length does not match shape");
  Tensor t;
  t.node_ = std::make_shared<detail::Node>();
  t.node_->shape = std::move(shape);
  t.node_->values = std::move(values);
  t.node_->requires_grad = requires_grad;
  t.node_->needs_grad = requires_grad;
  return t;
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  std::size_t n = values.size();
  return from(std::move(values), Shape{n}, requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return from(std::move(values), Shape{rows, cols}, requires_grad);
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return from(std::vector<double>(shape_numel(shape), 0.0), shape, requires_grad);
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw std::invalid_argument("Tensor::rows: not a matrix");
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw std::invalid_argument("Tensor::cols: not a matrix");
  return node_->shape[1];
}

const std::vector<double>& Tensor::grad() const {
  if (node_->grad.size() != node_->values.size())
    throw std::logic_error("Tensor::grad: no gradient accumulated");
  return node_->grad;
}

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("Tensor::item: tensor is not scalar");
  return node_->values[0];
}

void Tensor::zero_grad() { node_->grad.assign(node_->values.size(), 0.0); }

// ---------------------------------------------------------------------------
// Broadcasting machinery for elementwise binary ops.

namespace {

struct Broadcast2 {
  Shape out_shape;
  std::size_t n = 0;
  std::size_t rows = 1, cols = 1;
  // 0 = same layout as output, 1 = single element, 2 = column vector (r,1),
  // 3 = row vector (1,c)
  int mode_a = 0, mode_b = 0;

  std::size_t index(int mode, std::size_t flat) const {
    switch (mode) {
      case 0: return flat;
      case 1: return 0;
      case 2: return flat / cols;
      default: return flat % cols;
    }
  }
};

Broadcast2 make_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  Broadcast2 bc;
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  auto one = [](const Tensor& t) { return t.numel() == 1; };
  if (sa == sb) {
    bc.out_shape = sa;
  } else if (one(b)) {
    bc.out_shape = sa;
    bc.mode_b = 1;
  } else if (one(a)) {
    bc.out_shape = sb;
    bc.mode_a = 1;
  } else if (sa.size() == 2 && sb.size() == 2 && sa[0] == sb[0] && sb[1] == 1) {
    bc.out_shape = sa;
    bc.mode_b = 2;
  } else if (sa.size() == 2 && sb.size() == 2 && sa[0] == sb[0] && sa[1] == 1) {
    bc.out_shape = sb;
    bc.mode_a = 2;
  } else if (sa.size() == 2 && sb.size() == 2 && sa[1] == sb[1] && sb[0] == 1) {
    bc.out_shape = sa;
    bc.mode_b = 3;
  } else if (sa.size() == 2 && sb.size() == 2 && sa[1] == sb[1] && sa[0] == 1) {
    bc.out_shape = sb;
    bc.mode_a = 3;
  } else {
    shape_error(op);
  }
  bc.n = shape_numel(bc.out_shape);
  if (bc.out_shape.size() == 2) {
    bc.rows = bc.out_shape[0];
    bc.cols = bc.out_shape[1];
  } else {
    bc.cols = bc.n == 0 ? 1 : bc.n;
  }
  return bc;
}

template <class Fwd, class Bwd>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Bwd bwd) {
  Broadcast2 bc = make_broadcast(a, b, name);
  std::vector<double> out(bc.n);
  const auto& va = a.values();
  const auto& vb = b.values();
  for (std::size_t i = 0; i < bc.n; ++i)
    out[i] = fwd(va[bc.index(bc.mode_a, i)], vb[bc.index(bc.mode_b, i)]);
  return make_op(bc.out_shape, std::move(out), {a, b}, [bc, bwd](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    for (std::size_t i = 0; i < bc.n; ++i) {
      double g = self.grad[i];
      if (g == 0.0) continue;
      std::size_t ia = bc.index(bc.mode_a, i);
      std::size_t ib = bc.index(bc.mode_b, i);
      double da, db;
      bwd(pa.values[ia], pb.values[ib], self.values[i], da, db);
      if (pa.needs_grad) pa.grad[ia] += g * da;
      if (pb.needs_grad) pb.grad[ib] += g * db;
    }
  });
}

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& x, Fwd fwd, Bwd bwd) {
  std::vector<double> out(x.numel());
  const auto& v = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = fwd(v[i]);
  return make_op(x.shape(), std::move(out), {x}, [bwd](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    for (std::size_t i = 0; i < self.values.size(); ++i)
      p.grad[i] += self.grad[i] * bwd(p.values[i], self.values[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "add", [](double x, double y) { return x + y; },
                   [](double, double, double, double& da, double& db) {
                     da = 1.0;
                     db = 1.0;
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "sub", [](double x, double y) { return x - y; },
                   [](double, double, double, double& da, double& db) {
                     da = 1.0;
                     db = -1.0;
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "mul", [](double x, double y) { return x * y; },
                   [](double x, double y, double, double& da, double& db) {
                     da = y;
                     db = x;
                   });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "div", [](double x, double y) { return x / y; },
                   [](double x, double y, double, double& da, double& db) {
                     da = 1.0 / y;
                     db = -x / (y * y);
                   });
}

Tensor add(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
Tensor sub(double a, const Tensor& b) { return sub(Tensor::scalar(a), b); }
Tensor mul(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }

Tensor relu(const Tensor& x) {
  return unary_op(x, [](double v) { return v > 0.0 ? v : 0.0; },
                  [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary_op(x, [slope](double v) { return v > 0.0 ? v : slope * v; },
                  [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor tanh(const Tensor& x) {
  return unary_op(x, [](double v) { return std::tanh(v); },
                  [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary_op(x, [](double v) { return std::exp(v); },
                  [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values())
    if (v <= 0.0) throw std::domain_error("log: non-positive input");
  return unary_op(x, [](double v) { return std::log(v); },
                  [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  for (double v : x.values())
    if (v < 0.0) throw std::domain_error("sqrt: negative input");
  return unary_op(x, [](double v) { return std::sqrt(v); },
                  [](double, double y) { return 0.5 / y; });
}

Tensor abs(const Tensor& x) {
  return unary_op(x, [](double v) { return std::fabs(v); },
                  [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor neg(const Tensor& x) {
  return unary_op(x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return make_op(Shape{}, {acc}, {x}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    double g = self.grad[0];
    for (double& pg : p.grad) pg += g;
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  double inv = 1.0 / static_cast<double>(x.numel());
  return make_op(Shape{}, {acc * inv}, {x}, [inv](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    double g = self.grad[0] * inv;
    for (double& pg : p.grad) pg += g;
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) shape_error("matmul");
  const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
  std::vector<double> out(r * c, 0.0);
  const auto& va = a.values();
  const auto& vb = b.values();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double av = va[i * k + p];
      if (av == 0.0) continue;
      const double* brow = vb.data() + p * c;
      double* orow = out.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
  return make_op(Shape{r, c}, std::move(out), {a, b}, [r, k, c](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.needs_grad) {
      // dA = G * B^T
      for (std::size_t i = 0; i < r; ++i) {
        const double* grow = self.grad.data() + i * c;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb.values.data() + p * c;
          double acc = 0.0;
          for (std::size_t j = 0; j < c; ++j) acc += grow[j] * brow[j];
          pa.grad[i * k + p] += acc;
        }
      }
    }
    if (pb.needs_grad) {
      // dB = A^T * G
      for (std::size_t i = 0; i < r; ++i) {
        const double* grow = self.grad.data() + i * c;
        for (std::size_t p = 0; p < k; ++p) {
          double av = pa.values[i * k + p];
          if (av == 0.0) continue;
          double* brow = pb.grad.data() + p * c;
          for (std::size_t j = 0; j < c; ++j) brow[j] += av * grow[j];
        }
      }
    }
  });
}

Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b) {
  if (x.rank() != 1) throw std::invalid_argument("affine: x must be a vector");
  if (b.rank() != 1 || w.rank() != 2 || w.cols() != x.numel() || w.rows() != b.numel())
    shape_error("affine");
  Tensor xc = reshape(x, Shape{x.numel(), 1});
  Tensor y = matmul(w, xc);
  return reshape(add(y, reshape(b, Shape{b.numel(), 1})), Shape{b.numel()});
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 3) shape_error("conv1d");
  const std::size_t in_ch = x.shape()[0], len = x.shape()[1];
  const std::size_t out_ch = w.shape()[0], ks = w.shape()[2];
  if (w.shape()[1] != in_ch || ks % 2 == 0 || b.rank() != 1 || b.numel() != out_ch)
    shape_error("conv1d");
  const std::size_t pad = (ks - 1) / 2;
  std::vector<double> out(out_ch * len, 0.0);
  const auto& vx = x.values();
  const auto& vw = w.values();
  const auto& vbias = b.values();
  // Per-tap loops: for tap j the valid output range is contiguous, so the
  // inner loop is a plain strided accumulate.
  for (std::size_t o = 0; o < out_ch; ++o) {
    double* orow = out.data() + o * len;
    for (std::size_t t = 0; t < len; ++t) orow[t] = vbias[o];
    for (std::size_t i = 0; i < in_ch; ++i) {
      const double* xrow = vx.data() + i * len;
      const double* wrow = vw.data() + (o * in_ch + i) * ks;
      for (std::size_t j = 0; j < ks; ++j) {
        double wv = wrow[j];
        if (wv == 0.0) continue;
        long off = static_cast<long>(j) - static_cast<long>(pad);
        std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
        std::size_t t1 = off > 0 ? len - static_cast<std::size_t>(off) : len;
        const double* src = xrow + off;
        for (std::size_t t = t0; t < t1; ++t) orow[t] += wv * src[t];
      }
    }
  }
  return make_op(Shape{out_ch, len}, std::move(out), {x, w, b},
                 [in_ch, out_ch, len, ks, pad](detail::Node& self) {
                   auto& px = *self.parents[0];
                   auto& pw = *self.parents[1];
                   auto& pbias = *self.parents[2];
                   for (std::size_t o = 0; o < out_ch; ++o) {
                     const double* grow = self.grad.data() + o * len;
                     if (pbias.needs_grad) {
                       double acc = 0.0;
                       for (std::size_t t = 0; t < len; ++t) acc += grow[t];
                       pbias.grad[o] += acc;
                     }
                     for (std::size_t i = 0; i < in_ch; ++i) {
                       const double* xrow = px.values.data() + i * len;
                       const double* wrow = pw.values.data() + (o * in_ch + i) * ks;
                       double* gxrow = px.needs_grad ? px.grad.data() + i * len : nullptr;
                       double* gwrow = pw.needs_grad ? pw.grad.data() + (o * in_ch + i) * ks : nullptr;
                       for (std::size_t j = 0; j < ks; ++j) {
                         long off = static_cast<long>(j) - static_cast<long>(pad);
                         std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
                         std::size_t t1 = off > 0 ? len - static_cast<std::size_t>(off) : len;
                         if (gxrow) {
                           double wv = wrow[j];
                           double* dst = gxrow + off;
                           for (std::size_t t = t0; t < t1; ++t) dst[t] += wv * grow[t];
                         }
                         if (gwrow) {
                           const double* src = xrow + off;
                           double acc = 0.0;
                           for (std::size_t t = t0; t < t1; ++t) acc += grow[t] * src[t];
                           gwrow[j] += acc;
                         }
                       }
                     }
                   }
                 });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  Shape out_shape;
  if (a.rank() == 1 && b.rank() == 1) {
    out_shape = Shape{a.numel() + b.numel()};
  } else if (a.rank() == 2 && b.rank() == 2 && a.cols() == b.cols()) {
    out_shape = Shape{a.rows() + b.rows(), a.cols()};
  } else {
    shape_error("concat_rows");
  }
  std::vector<double> out;
  out.reserve(a.numel() + b.numel());
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  std::size_t na = a.numel();
  return make_op(std::move(out_shape), std::move(out), {a, b}, [na](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.needs_grad)
      for (std::size_t i = 0; i < na; ++i) pa.grad[i] += self.grad[i];
    if (pb.needs_grad)
      for (std::size_t i = na; i < self.grad.size(); ++i) pb.grad[i - na] += self.grad[i];
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  std::size_t row_len, n_rows;
  if (x.rank() == 1) {
    row_len = 1;
    n_rows = x.numel();
  } else if (x.rank() == 2) {
    row_len = x.cols();
    n_rows = x.rows();
  } else {
    shape_error("slice_rows");
  }
  if (begin >= end || end > n_rows) throw std::invalid_argument("slice_rows: bad range");
  Shape out_shape = x.rank() == 1 ? Shape{end - begin} : Shape{end - begin, row_len};
  std::vector<double> out(x.values().begin() + static_cast<long>(begin * row_len),
                          x.values().begin() + static_cast<long>(end * row_len));
  return make_op(std::move(out_shape), std::move(out), {x},
                 [begin, row_len](detail::Node& self) {
                   auto& p = *self.parents[0];
                   if (!p.needs_grad) return;
                   std::size_t off = begin * row_len;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     p.grad[off + i] += self.grad[i];
                 });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) shape_error("transpose");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * c);
  const auto& v = x.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
  return make_op(Shape{c, r}, std::move(out), {x}, [r, c](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += self.grad[j * r + i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) shape_error("reshape");
  return make_op(std::move(shape), x.values(), {x}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

Tensor frame_extract(const Tensor& x, std::size_t k, std::size_t hop) {
  if (x.rank() != 1) throw std::invalid_argument("frame_extract: input must be a vector");
  if (k == 0 || hop == 0 || x.numel() < k)
    throw std::invalid_argument("frame_extract: bad window/hop for signal length");
  const std::size_t T = (x.numel() - k) / hop + 1;
  std::vector<double> out(T * k);
  const auto& v = x.values();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t n = 0; n < k; ++n) out[t * k + n] = v[t * hop + n];
  return make_op(Shape{T, k}, std::move(out), {x}, [T, k, hop](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t n = 0; n < k; ++n) p.grad[t * hop + n] += self.grad[t * k + n];
  });
}

Tensor overlap_add(const Tensor& frames, std::size_t hop) {
  if (frames.rank() != 2) throw std::invalid_argument("overlap_add: frames must be a matrix");
  if (hop == 0) throw std::invalid_argument("overlap_add: hop must be positive");
  const std::size_t T = frames.rows(), k = frames.cols();
  const std::size_t len = (T - 1) * hop + k;
  std::vector<double> out(len, 0.0);
  const auto& v = frames.values();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t n = 0; n < k; ++n) out[t * hop + n] += v[t * k + n];
  return make_op(Shape{len}, std::move(out), {frames}, [T, k, hop](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t n = 0; n < k; ++n) p.grad[t * k + n] += self.grad[t * hop + n];
  });
}

Tensor l2_norm_rows(const Tensor& x, double eps) {
  if (x.rank() != 2) throw std::invalid_argument("l2_norm_rows: input must be a matrix");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r);
  const auto& v = x.values();
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* row = v.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * row[j];
    out[i] = std::sqrt(acc + eps);
  }
  return make_op(Shape{r}, std::move(out), {x}, [r, c](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.needs_grad) return;
    for (std::size_t i = 0; i < r; ++i) {
      double g = self.grad[i] / self.values[i];
      if (g == 0.0) continue;
      const double* row = p.values.data() + i * c;
      double* grow = p.grad.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) grow[j] += g * row[j];
    }
  });
}

// ---------------------------------------------------------------------------
// Backward sweep.

namespace {

std::vector<detail::Node*> topo_from(detail::Node* loss) {
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  struct Item {
    detail::Node* node;
    std::size_t next_parent;
  };
  std::vector<Item> stack;
  stack.push_back({loss, 0});
  visited.insert(loss);
  while (!stack.empty()) {
    Item& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      detail::Node* p = top.node->parents[top.next_parent++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }
  return order;  // post-order: parents before consumers
}

}  // namespace

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  detail::Node* root = loss.node();
  if (root->backward_done)
    throw std::invalid_argument("backward: already run on this loss; reset_backward first");
  std::vector<detail::Node*> order = topo_from(root);
  for (detail::Node* n : order)
    if (n->needs_grad) n->ensure_grad();
  root->backward_done = true;
  if (!root->needs_grad) return;
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->needs_grad && n->backprop) n->backprop(*n);
  }
}

void reset_backward(const Tensor& loss) {
  if (!loss.defined()) return;
  std::vector<detail::Node*> order = topo_from(loss.node());
  for (detail::Node* n : order) {
    n->backward_done = false;
    if (!n->grad.empty()) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double h) {
  if (h <= 0.0) throw std::invalid_argument("grad_check: h must be positive");
  if (!x.requires_grad()) throw std::invalid_argument("grad_check: x must require grad");
  x.zero_grad();
  {
    Tensor loss = f(x);
    backward(loss);
  }
  std::vector<double> analytic = x.grad();
  auto& v = x.mutable_values();
  double max_rel = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double saved = v[i];
    v[i] = saved + h;
    double fp = f(x).item();
    v[i] = saved - h;
    double fm = f(x).item();
    v[i] = saved;
    double numeric = (fp - fm) / (2.0 * h);
    double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::fabs(analytic[i] - numeric) / denom);
  }
  x.zero_grad();
  return max_rel;
}

}  // namespace ged
