// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#include "amem/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace amem::tc {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
ConstMatMap<T> cmat(const Buffer<T>& v, std::size_t rows, std::size_t cols) {
  return ConstMatMap<T>(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
template <typename T>
MatMap<T> mmat(Buffer<T>& v, std::size_t rows, std::size_t cols) {
  return MatMap<T>(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
template <typename T>
ConstVecMap<T> cvec(const Buffer<T>& v) {
  return ConstVecMap<T>(v.data(), static_cast<Eigen::Index>(v.size()));
}
template <typename T>
VecMap<T> mvec(Buffer<T>& v) {
  return VecMap<T>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op, const char* arg) {
  require(t.defined() && t.rank() == rank, std::string(op) + ": " + arg + " must have rank " +
                                               std::to_string(rank) + ", got " +
                                               (t.defined() ? shape_str(t.shape()) : "undefined"));
}

template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
  for (T v : t.data()) {
    if (std::isnan(v)) throw NumericError(std::string(op) + ": NaN input");
  }
}

template <typename T>
T sigmoid_scalar(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <typename T>
Tensor<T> matmul(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul", "a");
  require_rank(b, 2, "matmul", "b");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  require(b.dim(0) == k,
          "matmul: inner dimensions disagree: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros({m, n});
  auto& on = *out.node();
  mmat(on.value, m, n).noalias() = cmat(a.node()->value, m, k) * cmat(b.node()->value, k, n);
  if (g.needs_grad({&a, &b})) {
    g.record({out}, [a, b, out, m, k, n] {
      const auto dout = cmat(out.node()->grad, m, n);
      if (a.requires_grad()) {
        a.node()->ensure_grad();
        mmat(a.node()->grad, m, k).noalias() += dout * cmat(b.node()->value, k, n).transpose();
      }
      if (b.requires_grad()) {
        b.node()->ensure_grad();
        mmat(b.node()->grad, k, n).noalias() += cmat(a.node()->value, m, k).transpose() * dout;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> matvec(Graph<T>& g, const Tensor<T>& w, const Tensor<T>& x) {
  require_rank(w, 2, "matvec", "w");
  require_rank(x, 1, "matvec", "x");
  const std::size_t m = w.dim(0), n = w.dim(1);
  require(x.dim(0) == n, "matvec: " + shape_str(w.shape()) + " x " + shape_str(x.shape()));
  Tensor<T> out = Tensor<T>::zeros({m});
  mvec(out.node()->value).noalias() = cmat(w.node()->value, m, n) * cvec(x.node()->value);
  if (g.needs_grad({&w, &x})) {
    g.record({out}, [w, x, out, m, n] {
      const auto dy = cvec(out.node()->grad);
      if (w.requires_grad()) {
        w.node()->ensure_grad();
        mmat(w.node()->grad, m, n).noalias() += dy * cvec(x.node()->value).transpose();
      }
      if (x.requires_grad()) {
        x.node()->ensure_grad();
        mvec(x.node()->grad).noalias() += cmat(w.node()->value, m, n).transpose() * dy;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> matvec_t(Graph<T>& g, const Tensor<T>& w, const Tensor<T>& x) {
  require_rank(w, 2, "matvec_t", "w");
  require_rank(x, 1, "matvec_t", "x");
  const std::size_t m = w.dim(0), n = w.dim(1);
  require(x.dim(0) == m, "matvec_t: " + shape_str(w.shape()) + "^T x " + shape_str(x.shape()));
  Tensor<T> out = Tensor<T>::zeros({n});
  mvec(out.node()->value).noalias() = cmat(w.node()->value, m, n).transpose() * cvec(x.node()->value);
  if (g.needs_grad({&w, &x})) {
    g.record({out}, [w, x, out, m, n] {
      const auto dy = cvec(out.node()->grad);
      if (w.requires_grad()) {
        w.node()->ensure_grad();
        mmat(w.node()->grad, m, n).noalias() += cvec(x.node()->value) * dy.transpose();
      }
      if (x.requires_grad()) {
        x.node()->ensure_grad();
        mvec(x.node()->grad).noalias() += cmat(w.node()->value, m, n) * dy;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> linear(Graph<T>& g, const Tensor<T>& w, const Tensor<T>& x, const Tensor<T>& b) {
  require_rank(w, 2, "linear", "w");
  require_rank(x, 1, "linear", "x");
  require_rank(b, 1, "linear", "b");
  const std::size_t m = w.dim(0), n = w.dim(1);
  require(x.dim(0) == n && b.dim(0) == m, "linear: w " + shape_str(w.shape()) + ", x " +
                                              shape_str(x.shape()) + ", b " + shape_str(b.shape()));
  Tensor<T> out(Shape{m}, b.node()->value);
  mvec(out.node()->value).noalias() += cmat(w.node()->value, m, n) * cvec(x.node()->value);
  if (g.needs_grad({&w, &x, &b})) {
    g.record({out}, [w, x, b, out, m, n] {
      const auto dy = cvec(out.node()->grad);
      if (w.requires_grad()) {
        w.node()->ensure_grad();
        mmat(w.node()->grad, m, n).noalias() += dy * cvec(x.node()->value).transpose();
      }
      if (x.requires_grad()) {
        x.node()->ensure_grad();
        mvec(x.node()->grad).noalias() += cmat(w.node()->value, m, n).transpose() * dy;
      }
      if (b.requires_grad()) {
        b.node()->ensure_grad();
        mvec(b.node()->grad) += dy;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> add(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out(a.shape(), a.node()->value);
  mvec(out.node()->value) += cvec(b.node()->value);
  if (g.needs_grad({&a, &b})) {
    g.record({out}, [a, b, out] {
      for (const Tensor<T>* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        t->node()->ensure_grad();
        mvec(t->node()->grad) += cvec(out.node()->grad);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out(a.shape(), a.node()->value);
  mvec(out.node()->value).array() *= cvec(b.node()->value).array();
  if (g.needs_grad({&a, &b})) {
    g.record({out}, [a, b, out] {
      const auto dy = cvec(out.node()->grad).array();
      if (a.requires_grad()) {
        a.node()->ensure_grad();
        mvec(a.node()->grad).array() += dy * cvec(b.node()->value).array();
      }
      if (b.requires_grad()) {
        b.node()->ensure_grad();
        mvec(b.node()->grad).array() += dy * cvec(a.node()->value).array();
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(Graph<T>& g, const Tensor<T>& a, T factor) {
  Tensor<T> out(a.shape(), a.node()->value);
  mvec(out.node()->value) *= factor;
  if (g.needs_grad({&a})) {
    g.record({out}, [a, out, factor] {
      a.node()->ensure_grad();
      mvec(a.node()->grad) += factor * cvec(out.node()->grad);
    });
  }
  return out;
}

template <typename T>
Tensor<T> add_scaled(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& s, std::span<const T> d) {
  require_rank(a, 1, "add_scaled", "a");
  require(s.size() == 1, "add_scaled: scale must be scalar, got " + shape_str(s.shape()));
  require(d.size() == a.size(), "add_scaled: direction length " + std::to_string(d.size()) +
                                    " vs " + shape_str(a.shape()));
  Buffer<T> dir(d.begin(), d.end());
  Tensor<T> out(a.shape(), a.node()->value);
  const T sv = s[0];
  for (std::size_t i = 0; i < dir.size(); ++i) out[i] += sv * dir[i];
  if (g.needs_grad({&a, &s})) {
    g.record({out}, [a, s, out, dir = std::move(dir)] {
      const auto& dy = out.node()->grad;
      if (a.requires_grad()) {
        a.node()->ensure_grad();
        for (std::size_t i = 0; i < dy.size(); ++i) a.node()->grad[i] += dy[i];
      }
      if (s.requires_grad()) {
        s.node()->ensure_grad();
        T acc = 0;
        for (std::size_t i = 0; i < dy.size(); ++i) acc += dy[i] * dir[i];
        s.node()->grad[0] += acc;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> tanh(Graph<T>& g, const Tensor<T>& x) {
  Tensor<T> out(x.shape(), x.node()->value);
  for (T& v : out.data()) v = std::tanh(v);
  if (g.needs_grad({&x})) {
    g.record({out}, [x, out] {
      const auto& y = out.node()->value;
      const auto& dy = out.node()->grad;
      x.node()->ensure_grad();
      auto& dx = x.node()->grad;
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * (T(1) - y[i] * y[i]);
    });
  }
  return out;
}

template <typename T>
Tensor<T> sigmoid(Graph<T>& g, const Tensor<T>& x) {
  Tensor<T> out(x.shape(), x.node()->value);
  for (T& v : out.data()) v = sigmoid_scalar(v);
  if (g.needs_grad({&x})) {
    g.record({out}, [x, out] {
      const auto& y = out.node()->value;
      const auto& dy = out.node()->grad;
      x.node()->ensure_grad();
      auto& dx = x.node()->grad;
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
    });
  }
  return out;
}

template <typename T>
Tensor<T> relu(Graph<T>& g, const Tensor<T>& x) {
  Tensor<T> out(x.shape(), x.node()->value);
  for (T& v : out.data()) v = v > T(0) ? v : T(0);
  if (g.needs_grad({&x})) {
    g.record({out}, [x, out] {
      const auto& xv = x.node()->value;
      const auto& dy = out.node()->grad;
      x.node()->ensure_grad();
      auto& dx = x.node()->grad;
      for (std::size_t i = 0; i < xv.size(); ++i) {
        if (xv[i] > T(0)) dx[i] += dy[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat(Graph<T>& g, const std::vector<Tensor<T>>& parts) {
  require(!parts.empty(), "concat: no inputs");
  Buffer<T> values;
  bool any_grad = false;
  for (const auto& p : parts) {
    values.insert(values.end(), p.data().begin(), p.data().end());
    any_grad = any_grad || p.requires_grad();
  }
  const std::size_t n = values.size();
  Tensor<T> out(Shape{n}, std::move(values));
  if (g.recording() && any_grad) {
    g.record({out}, [parts, out] {
      const auto& dy = out.node()->grad;
      std::size_t offset = 0;
      for (const auto& p : parts) {
        if (p.requires_grad()) {
          p.node()->ensure_grad();
          auto& dp = p.node()->grad;
          for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += dy[offset + i];
        }
        offset += p.size();
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> stack(Graph<T>& g, const std::vector<Tensor<T>>& rows) {
  require(!rows.empty(), "stack: no inputs");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    require(r.size() == d, "stack: row " + shape_str(r.shape()) + " vs length " + std::to_string(d));
  }
  Tensor<T> flat = concat(g, rows);
  return reshape(g, flat, Shape{rows.size(), d});
}

template <typename T>
Tensor<T> reshape(Graph<T>& g, const Tensor<T>& x, Shape shape) {
  require(numel(shape) == x.size(),
          "reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  Tensor<T> out(std::move(shape), x.node()->value);
  if (g.needs_grad({&x})) {
    g.record({out}, [x, out] {
      x.node()->ensure_grad();
      mvec(x.node()->grad) += cvec(out.node()->grad);
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(Graph<T>& g, const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  Tensor<T> out = Tensor<T>::scalar(acc);
  if (g.needs_grad({&x})) {
    g.record({out}, [x, out] {
      x.node()->ensure_grad();
      const T dy = out.node()->grad[0];
      for (T& v : x.node()->grad) v += dy;
    });
  }
  return out;
}

template <typename T>
Tensor<T> embedding(Graph<T>& g, const Tensor<T>& table, std::size_t index) {
  require_rank(table, 2, "embedding", "table");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  if (index >= rows) {
    throw IndexError("embedding: index " + std::to_string(index) + " outside table of " +
                     std::to_string(rows) + " rows");
  }
  const auto& tv = table.node()->value;
  Buffer<T> row(tv.begin() + static_cast<std::ptrdiff_t>(index * d),
                     tv.begin() + static_cast<std::ptrdiff_t>((index + 1) * d));
  Tensor<T> out(Shape{d}, std::move(row));
  if (g.needs_grad({&table})) {
    g.record({out}, [table, out, index, d] {
      table.node()->ensure_grad();
      auto& dt = table.node()->grad;
      const auto& dy = out.node()->grad;
      for (std::size_t i = 0; i < d; ++i) dt[index * d + i] += dy[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax(Graph<T>& g, const Tensor<T>& logits) {
  require_rank(logits, 1, "softmax", "logits");
  check_finite(logits, "softmax");
  const auto& x = logits.node()->value;
  const T mx = *std::max_element(x.begin(), x.end());
  Buffer<T> y(x.size());
  T total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - mx);
    total += y[i];
  }
  for (T& v : y) v /= total;
  Tensor<T> out(logits.shape(), std::move(y));
  if (g.needs_grad({&logits})) {
    g.record({out}, [logits, out] {
      const auto& yv = out.node()->value;
      const auto& dy = out.node()->grad;
      T inner = 0;
      for (std::size_t i = 0; i < yv.size(); ++i) inner += dy[i] * yv[i];
      logits.node()->ensure_grad();
      auto& dx = logits.node()->grad;
      for (std::size_t i = 0; i < yv.size(); ++i) dx[i] += yv[i] * (dy[i] - inner);
    });
  }
  return out;
}

template <typename T>
Tensor<T> cross_entropy(Graph<T>& g, const Tensor<T>& logits, std::size_t target) {
  require_rank(logits, 1, "cross_entropy", "logits");
  if (target >= logits.size()) {
    throw IndexError("cross_entropy: target " + std::to_string(target) + " outside " +
                     std::to_string(logits.size()) + " classes");
  }
  check_finite(logits, "cross_entropy");
  const auto& x = logits.node()->value;
  const T mx = *std::max_element(x.begin(), x.end());
  Buffer<T> p(x.size());
  T total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i] - mx);
    total += p[i];
  }
  for (T& v : p) v /= total;
  const T loss = std::log(total) + mx - x[target];
  Tensor<T> out = Tensor<T>::scalar(loss);
  if (g.needs_grad({&logits})) {
    g.record({out}, [logits, out, target, p = std::move(p)] {
      const T dy = out.node()->grad[0];
      logits.node()->ensure_grad();
      auto& dx = logits.node()->grad;
      for (std::size_t i = 0; i < p.size(); ++i) {
        dx[i] += dy * (p[i] - (i == target ? T(1) : T(0)));
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> conv2d(Graph<T>& g, const Tensor<T>& input, const Tensor<T>& kernels,
                 const Tensor<T>& bias) {
  require_rank(input, 3, "conv2d", "input");
  require_rank(kernels, 4, "conv2d", "kernels");
  require_rank(bias, 1, "conv2d", "bias");
  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t cout = kernels.dim(0);
  require(kernels.dim(2) == 3 && kernels.dim(3) == 3,
          "conv2d: kernels must be 3x3, got " + shape_str(kernels.shape()));
  require(kernels.dim(1) == cin, "conv2d: channel mismatch, input " + shape_str(input.shape()) +
                                     " vs kernels " + shape_str(kernels.shape()));
  require(bias.dim(0) == cout, "conv2d: bias " + shape_str(bias.shape()) + " vs kernels " +
                                   shape_str(kernels.shape()));
  const std::size_t hw = h * w, kdim = cin * 9;

  // im2col: row (c, ky, kx), column (y, x).
  auto cols = std::make_shared<Buffer<T>>(kdim * hw, T(0));
  const auto& in = input.node()->value;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        T* row = cols->data() + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          const T* src = in.data() + c * hw + static_cast<std::size_t>(sy) * w;
          T* dst = row + y * w;
          const std::size_t x0 = kx == 0 ? 1 : 0;
          const std::size_t x1 = kx == 2 ? w - 1 : w;
          for (std::size_t x = x0; x < x1; ++x) dst[x] = src[x + kx - 1];
        }
      }
    }
  }

  Tensor<T> out = Tensor<T>::zeros({cout, h, w});
  auto& ov = out.node()->value;
  auto omat = mmat(ov, cout, hw);
  omat.noalias() = cmat(kernels.node()->value, cout, kdim) * cmat(*cols, kdim, hw);
  for (std::size_t co = 0; co < cout; ++co) omat.row(static_cast<Eigen::Index>(co)).array() += bias[co];

  if (g.needs_grad({&input, &kernels, &bias})) {
    g.record({out}, [input, kernels, bias, out, cols, cin, cout, h, w, hw, kdim] {
      const auto dout = cmat(out.node()->grad, cout, hw);
      if (kernels.requires_grad()) {
        kernels.node()->ensure_grad();
        mmat(kernels.node()->grad, cout, kdim).noalias() += dout * cmat(*cols, kdim, hw).transpose();
      }
      if (bias.requires_grad()) {
        bias.node()->ensure_grad();
        mvec(bias.node()->grad) += dout.rowwise().sum();
      }
      if (input.requires_grad()) {
        Buffer<T> dcols(kdim * hw);
        mmat(dcols, kdim, hw).noalias() = cmat(kernels.node()->value, cout, kdim).transpose() * dout;
        input.node()->ensure_grad();
        auto& din = input.node()->grad;
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const T* row = dcols.data() + ((c * 3 + ky) * 3 + kx) * hw;
              for (std::size_t y = 0; y < h; ++y) {
                const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                T* dst = din.data() + c * hw + static_cast<std::size_t>(sy) * w;
                const T* src = row + y * w;
                const std::size_t x0 = kx == 0 ? 1 : 0;
                const std::size_t x1 = kx == 2 ? w - 1 : w;
                for (std::size_t x = x0; x < x1; ++x) dst[x + kx - 1] += src[x];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2x2(Graph<T>& g, const Tensor<T>& input) {
  require_rank(input, 3, "maxpool2x2", "input");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  require(h % 2 == 0 && w % 2 == 0,
          "maxpool2x2: spatial dims must be even, got " + shape_str(input.shape()));
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor<T> out = Tensor<T>::zeros({c, oh, ow});
  std::vector<std::uint32_t> argmax(c * oh * ow);
  const auto& in = input.node()->value;
  auto& ov = out.node()->value;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t best = (ch * h + 2 * y) * w + 2 * x;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (ch * h + 2 * y + dy) * w + 2 * x + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (ch * oh + y) * ow + x;
        ov[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  if (g.needs_grad({&input})) {
    g.record({out}, [input, out, argmax = std::move(argmax)] {
      input.node()->ensure_grad();
      auto& din = input.node()->grad;
      const auto& dy = out.node()->grad;
      for (std::size_t o = 0; o < argmax.size(); ++o) din[argmax[o]] += dy[o];
    });
  }
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_step(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& h,
                                          const Tensor<T>& c, const Tensor<T>& w,
                                          const Tensor<T>& b) {
  require_rank(x, 1, "lstm_step", "x");
  require_rank(h, 1, "lstm_step", "h");
  require_rank(c, 1, "lstm_step", "c");
  require_rank(w, 2, "lstm_step", "w");
  require_rank(b, 1, "lstm_step", "b");
  const std::size_t d = x.size(), hd = h.size();
  require(c.size() == hd && w.dim(0) == 4 * hd && w.dim(1) == d + hd && b.size() == 4 * hd,
          "lstm_step: x " + shape_str(x.shape()) + ", h " + shape_str(h.shape()) + ", c " +
              shape_str(c.shape()) + ", w " + shape_str(w.shape()) + ", b " + shape_str(b.shape()));

  Buffer<T> xh(d + hd);
  std::copy(x.data().begin(), x.data().end(), xh.begin());
  std::copy(h.data().begin(), h.data().end(), xh.begin() + static_cast<std::ptrdiff_t>(d));
  Buffer<T> gates(b.data().begin(), b.data().end());
  mvec(gates).noalias() += cmat(w.node()->value, 4 * hd, d + hd) * cvec(xh);
  for (std::size_t i = 0; i < hd; ++i) {
    gates[i] = sigmoid_scalar(gates[i]);
    gates[hd + i] = sigmoid_scalar(gates[hd + i]);
    gates[2 * hd + i] = std::tanh(gates[2 * hd + i]);
    gates[3 * hd + i] = sigmoid_scalar(gates[3 * hd + i]);
  }
  Buffer<T> cn(hd), hn(hd), tc(hd);
  const auto& cv = c.node()->value;
  for (std::size_t i = 0; i < hd; ++i) {
    cn[i] = gates[hd + i] * cv[i] + gates[i] * gates[2 * hd + i];
    tc[i] = std::tanh(cn[i]);
    hn[i] = gates[3 * hd + i] * tc[i];
  }
  Tensor<T> h_out(Shape{hd}, std::move(hn));
  Tensor<T> c_out(Shape{hd}, std::move(cn));
  if (g.needs_grad({&x, &h, &c, &w, &b})) {
    g.record({h_out, c_out}, [x, h, c, w, b, h_out, c_out, d, hd, xh = std::move(xh),
                              gates = std::move(gates), tc = std::move(tc)] {
      const auto& dh = h_out.node()->grad;
      const auto& dc_ext = c_out.node()->grad;
      const auto& cv = c.node()->value;
      Buffer<T> dz(4 * hd);
      Buffer<T> dc_total(hd);
      for (std::size_t i = 0; i < hd; ++i) {
        const T ig = gates[i], fg = gates[hd + i], gg = gates[2 * hd + i], og = gates[3 * hd + i];
        const T dct = dc_ext[i] + dh[i] * og * (T(1) - tc[i] * tc[i]);
        dc_total[i] = dct;
        dz[i] = dct * gg * ig * (T(1) - ig);
        dz[hd + i] = dct * cv[i] * fg * (T(1) - fg);
        dz[2 * hd + i] = dct * ig * (T(1) - gg * gg);
        dz[3 * hd + i] = dh[i] * tc[i] * og * (T(1) - og);
      }
      if (c.requires_grad()) {
        c.node()->ensure_grad();
        auto& dcp = c.node()->grad;
        for (std::size_t i = 0; i < hd; ++i) dcp[i] += dc_total[i] * gates[hd + i];
      }
      if (w.requires_grad()) {
        w.node()->ensure_grad();
        mmat(w.node()->grad, 4 * hd, d + hd).noalias() += cvec(dz) * cvec(xh).transpose();
      }
      if (b.requires_grad()) {
        b.node()->ensure_grad();
        mvec(b.node()->grad) += cvec(dz);
      }
      if (x.requires_grad() || h.requires_grad()) {
        Buffer<T> dxh(d + hd);
        mvec(dxh).noalias() = cmat(w.node()->value, 4 * hd, d + hd).transpose() * cvec(dz);
        if (x.requires_grad()) {
          x.node()->ensure_grad();
          for (std::size_t i = 0; i < d; ++i) x.node()->grad[i] += dxh[i];
        }
        if (h.requires_grad()) {
          h.node()->ensure_grad();
          for (std::size_t i = 0; i < hd; ++i) h.node()->grad[i] += dxh[d + i];
        }
      }
    });
  }
  return {h_out, c_out};
}

template <typename T>
Tensor<T> hashed_weights(Graph<T>& g, const Tensor<T>& pool, std::span<const std::uint32_t> index,
                         std::span<const std::int8_t> sign, std::size_t rows, std::size_t cols) {
  require_rank(pool, 1, "hashed_weights", "pool");
  require(index.size() == rows * cols && sign.size() == rows * cols,
          "hashed_weights: tables do not cover " + std::to_string(rows) + "x" + std::to_string(cols));
  const std::size_t k = pool.size();
  Buffer<T> values(rows * cols);
  for (std::size_t e = 0; e < values.size(); ++e) {
    if (index[e] >= k) throw IndexError("hashed_weights: index outside candidate pool");
    values[e] = static_cast<T>(sign[e]) * pool[index[e]];
  }
  Tensor<T> out(Shape{rows, cols}, std::move(values));
  if (g.needs_grad({&pool})) {
    std::vector<std::uint32_t> idx(index.begin(), index.end());
    std::vector<std::int8_t> sg(sign.begin(), sign.end());
    g.record({out}, [pool, out, idx = std::move(idx), sg = std::move(sg)] {
      pool.node()->ensure_grad();
      auto& dp = pool.node()->grad;
      const auto& dw = out.node()->grad;
      for (std::size_t e = 0; e < dw.size(); ++e) dp[idx[e]] += static_cast<T>(sg[e]) * dw[e];
    });
  }
  return out;
}

#define AMEM_INSTANTIATE_OPS(T)                                                                  \
  template Tensor<T> matmul(Graph<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> matvec(Graph<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> matvec_t(Graph<T>&, const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> linear(Graph<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> add(Graph<T>&, const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> mul(Graph<T>&, const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> scale(Graph<T>&, const Tensor<T>&, T);                                      \
  template Tensor<T> add_scaled(Graph<T>&, const Tensor<T>&, const Tensor<T>&, std::span<const T>); \
  template Tensor<T> tanh(Graph<T>&, const Tensor<T>&);                                          \
  template Tensor<T> sigmoid(Graph<T>&, const Tensor<T>&);                                       \
  template Tensor<T> relu(Graph<T>&, const Tensor<T>&);                                          \
  template Tensor<T> concat(Graph<T>&, const std::vector<Tensor<T>>&);                           \
  template Tensor<T> stack(Graph<T>&, const std::vector<Tensor<T>>&);                            \
  template Tensor<T> reshape(Graph<T>&, const Tensor<T>&, Shape);                                \
  template Tensor<T> sum(Graph<T>&, const Tensor<T>&);                                           \
  template Tensor<T> embedding(Graph<T>&, const Tensor<T>&, std::size_t);                        \
  template Tensor<T> softmax(Graph<T>&, const Tensor<T>&);                                       \
  template Tensor<T> cross_entropy(Graph<T>&, const Tensor<T>&, std::size_t);                    \
  template Tensor<T> conv2d(Graph<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> maxpool2x2(Graph<T>&, const Tensor<T>&);                                    \
  template std::pair<Tensor<T>, Tensor<T>> lstm_step(Graph<T>&, const Tensor<T>&,                \
                                                     const Tensor<T>&, const Tensor<T>&,         \
                                                     const Tensor<T>&, const Tensor<T>&);        \
  template Tensor<T> hashed_weights(Graph<T>&, const Tensor<T>&, std::span<const std::uint32_t>, \
                                    std::span<const std::int8_t>, std::size_t, std::size_t);

AMEM_INSTANTIATE_OPS(float)
AMEM_INSTANTIATE_OPS(double)

#undef AMEM_INSTANTIATE_OPS

}  // namespace amem::tc
