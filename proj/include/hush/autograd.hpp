// autograd.hpp — define-by-run reverse-mode differentiation over Tensor.
//
// Every op builds a Node holding the forward value and a closure that routes
// the node's gradient to its parents. backward() runs the closures in reverse
// creation order over the reachable subgraph. All math is float64.

// Copyright 2026  the hush authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "hush/common.hpp"
#include "hush/fft.hpp"
#include "hush/segmentation.hpp"
#include "hush/stft.hpp"
#include "hush/tensor.hpp"

namespace hush::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first touch during backward
  bool requires_grad = false;
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad() {
    if (grad.numel() != value.numel()) grad = Tensor(value.shape());
    return grad;
  }
};

inline std::uint64_t next_seq() {
  static std::uint64_t counter = 0;
  return ++counter;
}

class Var {
 public:
  Var() = default;
  explicit Var(Tensor t, bool requires_grad = false) : n_(std::make_shared<Node>()) {
    n_->value = std::move(t);
    n_->requires_grad = requires_grad;
    n_->seq = next_seq();
  }

  bool defined() const { return static_cast<bool>(n_); }
  const Tensor& value() const { return n_->value; }
  Tensor& value() { return n_->value; }
  Tensor& grad() { return n_->ensure_grad(); }
  const Tensor& grad() const { return n_->grad; }
  bool requires_grad() const { return n_->requires_grad; }
  const std::vector<std::int64_t>& shape() const { return n_->value.shape(); }
  std::shared_ptr<Node> node() const { return n_; }

  static Var from_node(std::shared_ptr<Node> n) {
    Var v;
    v.n_ = std::move(n);
    return v;
  }

 private:
  std::shared_ptr<Node> n_;
};

namespace detail {

inline Var make_op(Tensor value, std::vector<Var> parents,
                   std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->seq = next_seq();
  bool needs = false;
  for (const auto& p : parents) {
    needs = needs || p.node()->requires_grad;
    n->parents.push_back(p.node());
  }
  n->requires_grad = needs;
  if (needs) n->backward_fn = std::move(backward_fn);
  return Var::from_node(n);
}

}  // namespace detail

// Runs reverse-mode accumulation from a scalar root.
inline void backward(const Var& root) {
  require(root.node()->value.numel() == 1, "backward: root must be scalar");
  // topological order by DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    order.push_back(n);
    for (const auto& p : n->parents)
      if (p->requires_grad) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->seq > b->seq; });
  root.node()->ensure_grad().fill(0.0);
  root.node()->grad[0] = 1.0;
  for (Node* n : order) {
    if (!n->backward_fn) continue;
    if (n->grad.numel() != n->value.numel()) continue;  // never reached
    n->backward_fn(*n);
  }
}

// ---------------------------------------------------------------------------
// Elementwise and structural ops
// ---------------------------------------------------------------------------

inline Var add(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "add: shape mismatch");
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
  return detail::make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.node()->requires_grad) {
      Tensor& g = a.node()->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
    if (b.node()->requires_grad) {
      Tensor& g = b.node()->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
  });
}

inline Var sub(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "sub: shape mismatch");
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return detail::make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.node()->requires_grad) {
      Tensor& g = a.node()->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
    if (b.node()->requires_grad) {
      Tensor& g = b.node()->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i];
    }
  });
}

inline Var mul(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "mul: shape mismatch");
  Tensor out = a.value();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
  return detail::make_op(std::move(out), {a, b}, [a, b](Node& n) mutable {
    if (a.node()->requires_grad) {
      Tensor& g = a.node()->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * b.value()[i];
    }
    if (b.node()->requires_grad) {
      Tensor& g = b.node()->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * a.value()[i];
    }
  });
}

inline Var scale(const Var& a, double c) {
  Tensor out = a.value();
  for (auto& v : out.vec()) v *= c;
  return detail::make_op(std::move(out), {a}, [a, c](Node& n) mutable {
    Tensor& g = a.node()->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += c * n.grad[i];
  });
}

inline Var relu(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.vec()) v = v > 0.0 ? v : 0.0;
  return detail::make_op(std::move(out), {a}, [a](Node& n) mutable {
    Tensor& g = a.node()->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i)
      if (a.value()[i] > 0.0) g[i] += n.grad[i];
  });
}

inline Var sigmoid(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.vec()) v = 1.0 / (1.0 + std::exp(-v));
  return detail::make_op(std::move(out), {a}, [a](Node& n) mutable {
    Tensor& g = a.node()->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) {
      const double s = n.value[i];
      g[i] += n.grad[i] * s * (1.0 - s);
    }
  });
}

inline Var reshape(const Var& a, std::vector<std::int64_t> shape) {
  Tensor out = a.value().reshaped(shape);
  return detail::make_op(std::move(out), {a}, [a](Node& n) mutable {
    Tensor& g = a.node()->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
  });
}

// Concatenates along dim 1 of [N, C, ...]; both inputs must agree elsewhere.
inline Var concat_channels(const Var& a, const Var& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  require(sa.size() == sb.size() && sa.size() >= 2, "concat_channels: rank mismatch");
  std::int64_t inner_a = 1, inner_b = 1;
  for (std::size_t i = 2; i < sa.size(); ++i) {
    require(sa[i] == sb[i], "concat_channels: trailing shape mismatch");
    inner_a *= sa[i];
    inner_b *= sb[i];
  }
  require(sa[0] == sb[0] && inner_a == inner_b, "concat_channels: shape mismatch");
  const std::int64_t n = sa[0], ca = sa[1], cb = sb[1], inner = inner_a;
  std::vector<std::int64_t> shape = sa;
  shape[1] = ca + cb;
  Tensor out(shape);
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(a.value().data() + i * ca * inner, ca * inner,
                out.data() + i * (ca + cb) * inner);
    std::copy_n(b.value().data() + i * cb * inner, cb * inner,
                out.data() + i * (ca + cb) * inner + ca * inner);
  }
  return detail::make_op(std::move(out), {a, b}, [a, b, n, ca, cb, inner](Node& nd) mutable {
    if (a.node()->requires_grad) {
      Tensor& g = a.node()->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < ca * inner; ++j)
          g[i * ca * inner + j] += nd.grad[i * (ca + cb) * inner + j];
    }
    if (b.node()->requires_grad) {
      Tensor& g = b.node()->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < cb * inner; ++j)
          g[i * cb * inner + j] += nd.grad[i * (ca + cb) * inner + ca * inner + j];
    }
  });
}

// Slice channels [c0, c1) along dim 1 of [N, C, ...].
inline Var slice_channels(const Var& a, std::int64_t c0, std::int64_t c1) {
  const auto& s = a.shape();
  require(s.size() >= 2 && c0 >= 0 && c1 <= s[1] && c0 < c1, "slice_channels: bad range");
  std::int64_t inner = 1;
  for (std::size_t i = 2; i < s.size(); ++i) inner *= s[i];
  const std::int64_t n = s[0], c = s[1], cs = c1 - c0;
  std::vector<std::int64_t> shape = s;
  shape[1] = cs;
  Tensor out(shape);
  for (std::int64_t i = 0; i < n; ++i)
    std::copy_n(a.value().data() + (i * c + c0) * inner, cs * inner,
                out.data() + i * cs * inner);
  return detail::make_op(std::move(out), {a}, [a, n, c, c0, cs, inner](Node& nd) mutable {
    Tensor& g = a.node()->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < cs * inner; ++j)
        g[(i * c + c0) * inner + j] += nd.grad[i * cs * inner + j];
  });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

// y = x * w^T + b;  x: [R, D], w: [O, D], b: [O] (optional).
inline Var linear(const Var& x, const Var& w, const Var& b) {
  const std::int64_t r = x.shape()[0], d = x.shape()[1], o = w.shape()[0];
  require(w.shape()[1] == d, "linear: weight shape mismatch");
  Tensor out({r, o});
  {
    CMapMat xm(x.value().data(), r, d), wm(w.value().data(), o, d);
    MapMat ym(out.data(), r, o);
    ym.noalias() = xm * wm.transpose();
  }
  if (b.defined()) {
    require(b.value().numel() == o, "linear: bias shape mismatch");
    for (std::int64_t i = 0; i < r; ++i)
      for (std::int64_t j = 0; j < o; ++j) out.at(i, j) += b.value()[j];
  }
  std::vector<Var> parents = b.defined() ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
  return detail::make_op(std::move(out), parents, [x, w, b, r, d, o](Node& n) mutable {
    CMapMat gy(n.grad.data(), r, o);
    if (x.node()->requires_grad) {
      CMapMat wm(w.value().data(), o, d);
      MapMat gx(x.node()->ensure_grad().data(), r, d);
      gx.noalias() += gy * wm;
    }
    if (w.node()->requires_grad) {
      CMapMat xm(x.value().data(), r, d);
      MapMat gw(w.node()->ensure_grad().data(), o, d);
      gw.noalias() += gy.transpose() * xm;
    }
    if (b.defined() && b.node()->requires_grad) {
      Tensor& gb = b.node()->ensure_grad();
      for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < o; ++j) gb[j] += n.grad[i * o + j];
    }
  });
}

// ---------------------------------------------------------------------------
// Convolutions (NCHW)
// ---------------------------------------------------------------------------

struct Conv2dGeom {
  std::int64_t kh = 1, kw = 1;
  std::int64_t sh = 1, sw = 1;
  std::int64_t dh = 1, dw = 1;
  std::int64_t ph = 0, pw = 0;

  std::int64_t out_h(std::int64_t h) const {
    return (h + 2 * ph - dh * (kh - 1) - 1) / sh + 1;
  }
  std::int64_t out_w(std::int64_t w) const {
    return (w + 2 * pw - dw * (kw - 1) - 1) / sw + 1;
  }
};

namespace detail {

// cols: [C*kh*kw, Ho*Wo]
inline void im2col(const double* x, std::int64_t c, std::int64_t h, std::int64_t w,
                   const Conv2dGeom& g, double* cols) {
  const std::int64_t ho = g.out_h(h), wo = g.out_w(w);
  std::int64_t row = 0;
  for (std::int64_t ci = 0; ci < c; ++ci)
    for (std::int64_t ki = 0; ki < g.kh; ++ki)
      for (std::int64_t kj = 0; kj < g.kw; ++kj, ++row) {
        double* dst = cols + row * ho * wo;
        const double* src = x + ci * h * w;
        for (std::int64_t oi = 0; oi < ho; ++oi) {
          const std::int64_t ii = oi * g.sh - g.ph + ki * g.dh;
          if (ii < 0 || ii >= h) {
            std::fill_n(dst + oi * wo, wo, 0.0);
            continue;
          }
          for (std::int64_t oj = 0; oj < wo; ++oj) {
            const std::int64_t jj = oj * g.sw - g.pw + kj * g.dw;
            dst[oi * wo + oj] = (jj >= 0 && jj < w) ? src[ii * w + jj] : 0.0;
          }
        }
      }
}

// scatter-add the columns back; adjoint of im2col
inline void col2im(const double* cols, std::int64_t c, std::int64_t h, std::int64_t w,
                   const Conv2dGeom& g, double* x) {
  const std::int64_t ho = g.out_h(h), wo = g.out_w(w);
  std::int64_t row = 0;
  for (std::int64_t ci = 0; ci < c; ++ci)
    for (std::int64_t ki = 0; ki < g.kh; ++ki)
      for (std::int64_t kj = 0; kj < g.kw; ++kj, ++row) {
        const double* src = cols + row * ho * wo;
        double* dst = x + ci * h * w;
        for (std::int64_t oi = 0; oi < ho; ++oi) {
          const std::int64_t ii = oi * g.sh - g.ph + ki * g.dh;
          if (ii < 0 || ii >= h) continue;
          for (std::int64_t oj = 0; oj < wo; ++oj) {
            const std::int64_t jj = oj * g.sw - g.pw + kj * g.dw;
            if (jj >= 0 && jj < w) dst[ii * w + jj] += src[oi * wo + oj];
          }
        }
      }
}

}  // namespace detail

// x: [N, Cin, H, W], w: [Cout, Cin, kh, kw], b: [Cout] (optional)
inline Var conv2d(const Var& x, const Var& w, const Var& b, const Conv2dGeom& g) {
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  require(xs.size() == 4 && ws.size() == 4, "conv2d: rank mismatch");
  require(xs[1] == ws[1], "conv2d: channel mismatch");
  require(ws[2] == g.kh && ws[3] == g.kw, "conv2d: kernel mismatch");
  const std::int64_t n = xs[0], cin = xs[1], h = xs[2], wd = xs[3], cout = ws[0];
  const std::int64_t ho = g.out_h(h), wo = g.out_w(wd);
  require(ho > 0 && wo > 0, "conv2d: output collapsed to zero");
  const std::int64_t krows = cin * g.kh * g.kw;

  Tensor out({n, cout, ho, wo});
  {
    std::vector<double> cols(static_cast<std::size_t>(krows) * ho * wo);
    CMapMat wm(w.value().data(), cout, krows);
    for (std::int64_t i = 0; i < n; ++i) {
      detail::im2col(x.value().data() + i * cin * h * wd, cin, h, wd, g, cols.data());
      CMapMat cm(cols.data(), krows, ho * wo);
      MapMat ym(out.data() + i * cout * ho * wo, cout, ho * wo);
      ym.noalias() = wm * cm;
    }
  }
  if (b.defined()) {
    require(b.value().numel() == cout, "conv2d: bias mismatch");
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t co = 0; co < cout; ++co) {
        double* p = out.data() + (i * cout + co) * ho * wo;
        const double bv = b.value()[co];
        for (std::int64_t k = 0; k < ho * wo; ++k) p[k] += bv;
      }
  }
  std::vector<Var> parents = b.defined() ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
  return detail::make_op(
      std::move(out), parents, [x, w, b, g, n, cin, h, wd, cout, ho, wo, krows](Node& nd) mutable {
        std::vector<double> cols(static_cast<std::size_t>(krows) * ho * wo);
        for (std::int64_t i = 0; i < n; ++i) {
          CMapMat gy(nd.grad.data() + i * cout * ho * wo, cout, ho * wo);
          if (w.node()->requires_grad) {
            detail::im2col(x.value().data() + i * cin * h * wd, cin, h, wd, g, cols.data());
            CMapMat cm(cols.data(), krows, ho * wo);
            MapMat gw(w.node()->ensure_grad().data(), cout, krows);
            gw.noalias() += gy * cm.transpose();
          }
          if (x.node()->requires_grad) {
            CMapMat wm(w.value().data(), cout, krows);
            MapMat cm(cols.data(), krows, ho * wo);
            cm.noalias() = wm.transpose() * gy;
            detail::col2im(cols.data(), cin, h, wd, g,
                           x.node()->ensure_grad().data() + i * cin * h * wd);
          }
          if (b.defined() && b.node()->requires_grad) {
            Tensor& gb = b.node()->ensure_grad();
            for (std::int64_t co = 0; co < cout; ++co) {
              const double* p = nd.grad.data() + (i * cout + co) * ho * wo;
              double acc = 0.0;
              for (std::int64_t k = 0; k < ho * wo; ++k) acc += p[k];
              gb[co] += acc;
            }
          }
        }
      });
}

// Transposed convolution; the adjoint of conv2d with the same geometry.
// x: [N, Cin, H, W], w: [Cin, Cout, kh, kw], output spatial size is explicit
// (stride-2 upsampling is ambiguous by one sample otherwise).
inline Var conv_transpose2d(const Var& x, const Var& w, const Var& b, const Conv2dGeom& g,
                            std::int64_t out_h, std::int64_t out_w) {
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  require(xs.size() == 4 && ws.size() == 4, "conv_transpose2d: rank mismatch");
  require(xs[1] == ws[0], "conv_transpose2d: channel mismatch");
  const std::int64_t n = xs[0], cin = xs[1], h = xs[2], wd = xs[3], cout = ws[1];
  require(g.out_h(out_h) == h && g.out_w(out_w) == wd,
          "conv_transpose2d: output size inconsistent with geometry");
  const std::int64_t krows = cout * g.kh * g.kw;

  Tensor out({n, cout, out_h, out_w});
  {
    std::vector<double> cols(static_cast<std::size_t>(krows) * h * wd);
    CMapMat wm(w.value().data(), cin, krows);
    for (std::int64_t i = 0; i < n; ++i) {
      CMapMat xm(x.value().data() + i * cin * h * wd, cin, h * wd);
      MapMat cm(cols.data(), krows, h * wd);
      cm.noalias() = wm.transpose() * xm;
      detail::col2im(cols.data(), cout, out_h, out_w, g, out.data() + i * cout * out_h * out_w);
    }
  }
  if (b.defined()) {
    require(b.value().numel() == cout, "conv_transpose2d: bias mismatch");
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t co = 0; co < cout; ++co) {
        double* p = out.data() + (i * cout + co) * out_h * out_w;
        const double bv = b.value()[co];
        for (std::int64_t k = 0; k < out_h * out_w; ++k) p[k] += bv;
      }
  }
  std::vector<Var> parents = b.defined() ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
  return detail::make_op(
      std::move(out), parents,
      [x, w, b, g, n, cin, h, wd, cout, out_h, out_w, krows](Node& nd) mutable {
        std::vector<double> cols(static_cast<std::size_t>(krows) * h * wd);
        for (std::int64_t i = 0; i < n; ++i) {
          detail::im2col(nd.grad.data() + i * cout * out_h * out_w, cout, out_h, out_w, g,
                         cols.data());
          CMapMat gcols(cols.data(), krows, h * wd);
          if (x.node()->requires_grad) {
            CMapMat wm(w.value().data(), cin, krows);
            MapMat gx(x.node()->ensure_grad().data() + i * cin * h * wd, cin, h * wd);
            gx.noalias() += wm * gcols;
          }
          if (w.node()->requires_grad) {
            CMapMat xm(x.value().data() + i * cin * h * wd, cin, h * wd);
            MapMat gw(w.node()->ensure_grad().data(), cin, krows);
            gw.noalias() += xm * gcols.transpose();
          }
          if (b.defined() && b.node()->requires_grad) {
            Tensor& gb = b.node()->ensure_grad();
            for (std::int64_t co = 0; co < cout; ++co) {
              const double* p = nd.grad.data() + (i * cout + co) * out_h * out_w;
              double acc = 0.0;
              for (std::int64_t k = 0; k < out_h * out_w; ++k) acc += p[k];
              gb[co] += acc;
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Batch normalization over (N, H, W) per channel
// ---------------------------------------------------------------------------

inline Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta,
                       const std::shared_ptr<Tensor>& running_mean,
                       const std::shared_ptr<Tensor>& running_var, bool training,
                       double momentum = 0.1, double eps = 1e-5) {
  const auto& xs = x.shape();
  require(xs.size() == 4, "batchnorm2d: rank mismatch");
  const std::int64_t n = xs[0], c = xs[1], h = xs[2], w = xs[3];
  const std::int64_t m = n * h * w;
  require(gamma.value().numel() == c && beta.value().numel() == c, "batchnorm2d: affine mismatch");

  auto mean = std::make_shared<std::vector<double>>(c, 0.0);
  auto inv_std = std::make_shared<std::vector<double>>(c, 0.0);
  if (training) {
    for (std::int64_t ci = 0; ci < c; ++ci) {
      double acc = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double* p = x.value().data() + (i * c + ci) * h * w;
        for (std::int64_t k = 0; k < h * w; ++k) acc += p[k];
      }
      (*mean)[ci] = acc / static_cast<double>(m);
      double var = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double* p = x.value().data() + (i * c + ci) * h * w;
        for (std::int64_t k = 0; k < h * w; ++k) {
          const double d = p[k] - (*mean)[ci];
          var += d * d;
        }
      }
      var /= static_cast<double>(m);
      (*inv_std)[ci] = 1.0 / std::sqrt(var + eps);
      // running stats keep the unbiased variance
      const double unbiased = m > 1 ? var * m / (m - 1.0) : var;
      (*running_mean)[ci] = (1.0 - momentum) * (*running_mean)[ci] + momentum * (*mean)[ci];
      (*running_var)[ci] = (1.0 - momentum) * (*running_var)[ci] + momentum * unbiased;
    }
  } else {
    for (std::int64_t ci = 0; ci < c; ++ci) {
      (*mean)[ci] = (*running_mean)[ci];
      (*inv_std)[ci] = 1.0 / std::sqrt((*running_var)[ci] + eps);
    }
  }

  Tensor out(xs);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t ci = 0; ci < c; ++ci) {
      const double* p = x.value().data() + (i * c + ci) * h * w;
      double* q = out.data() + (i * c + ci) * h * w;
      const double mu = (*mean)[ci], is = (*inv_std)[ci];
      const double gm = gamma.value()[ci], bt = beta.value()[ci];
      for (std::int64_t k = 0; k < h * w; ++k) q[k] = gm * (p[k] - mu) * is + bt;
    }

  return detail::make_op(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, mean, inv_std, training, n, c, h, w, m](Node& nd) mutable {
        for (std::int64_t ci = 0; ci < c; ++ci) {
          const double mu = (*mean)[ci], is = (*inv_std)[ci];
          const double gm = gamma.value()[ci];
          // per-channel reductions
          double sum_gy = 0.0, sum_gy_xhat = 0.0;
          for (std::int64_t i = 0; i < n; ++i) {
            const double* gy = nd.grad.data() + (i * c + ci) * h * w;
            const double* xp = x.value().data() + (i * c + ci) * h * w;
            for (std::int64_t k = 0; k < h * w; ++k) {
              sum_gy += gy[k];
              sum_gy_xhat += gy[k] * (xp[k] - mu) * is;
            }
          }
          if (gamma.node()->requires_grad) gamma.node()->ensure_grad()[ci] += sum_gy_xhat;
          if (beta.node()->requires_grad) beta.node()->ensure_grad()[ci] += sum_gy;
          if (x.node()->requires_grad) {
            Tensor& gx = x.node()->ensure_grad();
            const double inv_m = 1.0 / static_cast<double>(m);
            for (std::int64_t i = 0; i < n; ++i) {
              const double* gy = nd.grad.data() + (i * c + ci) * h * w;
              const double* xp = x.value().data() + (i * c + ci) * h * w;
              double* gq = gx.data() + (i * c + ci) * h * w;
              for (std::int64_t k = 0; k < h * w; ++k) {
                const double xhat = (xp[k] - mu) * is;
                if (training)
                  gq[k] += gm * is * (gy[k] - inv_m * sum_gy - xhat * inv_m * sum_gy_xhat);
                else
                  gq[k] += gm * is * gy[k];
              }
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM (fused, manual backward). Gate order: i, f, g, o.
// x: [N, T, D] -> [N, T, 2H]; weights per direction: w_ih [4H, D],
// w_hh [4H, H], bias [4H].
// ---------------------------------------------------------------------------

namespace detail {

struct LstmTrace {
  // cached activations per direction: gates after nonlinearity, cell, tanh(cell)
  std::vector<double> i, f, g, o, c, tc, hprev;
};

inline void lstm_forward_dir(const double* x, std::int64_t n, std::int64_t t_len,
                             std::int64_t d, std::int64_t hs, const double* w_ih,
                             const double* w_hh, const double* bias, bool reverse,
                             double* out, std::int64_t out_stride, LstmTrace* trace) {
  const std::int64_t g4 = 4 * hs;
  // precompute x * w_ih^T for all frames
  std::vector<double> xw(static_cast<std::size_t>(n) * t_len * g4);
  {
    CMapMat xm(x, n * t_len, d);
    CMapMat wm(w_ih, g4, d);
    MapMat xwm(xw.data(), n * t_len, g4);
    xwm.noalias() = xm * wm.transpose();
  }
  if (trace) {
    const std::size_t sz = static_cast<std::size_t>(n) * t_len * hs;
    trace->i.resize(sz);
    trace->f.resize(sz);
    trace->g.resize(sz);
    trace->o.resize(sz);
    trace->c.resize(sz);
    trace->tc.resize(sz);
    trace->hprev.resize(sz);
  }
  std::vector<double> hbuf(static_cast<std::size_t>(n) * hs, 0.0);
  std::vector<double> cbuf(static_cast<std::size_t>(n) * hs, 0.0);
  std::vector<double> gates(static_cast<std::size_t>(n) * g4);
  CMapMat whm(w_hh, g4, hs);
  for (std::int64_t step = 0; step < t_len; ++step) {
    const std::int64_t t = reverse ? t_len - 1 - step : step;
    // gates = xw[t] + h * w_hh^T + b
    for (std::int64_t i = 0; i < n; ++i)
      std::copy_n(xw.data() + (i * t_len + t) * g4, g4, gates.data() + i * g4);
    {
      CMapMat hm(hbuf.data(), n, hs);
      MapMat gm(gates.data(), n, g4);
      gm.noalias() += hm * whm.transpose();
    }
    for (std::int64_t i = 0; i < n; ++i) {
      double* gt = gates.data() + i * g4;
      double* hp = hbuf.data() + i * hs;
      double* cp = cbuf.data() + i * hs;
      for (std::int64_t j = 0; j < hs; ++j) {
        const double gi = 1.0 / (1.0 + std::exp(-(gt[j] + bias[j])));
        const double gf = 1.0 / (1.0 + std::exp(-(gt[hs + j] + bias[hs + j])));
        const double gg = std::tanh(gt[2 * hs + j] + bias[2 * hs + j]);
        const double go = 1.0 / (1.0 + std::exp(-(gt[3 * hs + j] + bias[3 * hs + j])));
        const double c_prev = cp[j];
        const double c_new = gf * c_prev + gi * gg;
        const double tc = std::tanh(c_new);
        if (trace) {
          const std::size_t idx = static_cast<std::size_t>((i * t_len + t) * hs + j);
          trace->i[idx] = gi;
          trace->f[idx] = gf;
          trace->g[idx] = gg;
          trace->o[idx] = go;
          trace->c[idx] = c_prev;  // cell BEFORE this step
          trace->tc[idx] = tc;
          trace->hprev[idx] = hp[j];
        }
        cp[j] = c_new;
        hp[j] = go * tc;
        out[(i * t_len + t) * out_stride + j] = hp[j];
      }
    }
  }
}

inline void lstm_backward_dir(const double* x, const double* gout, std::int64_t n,
                              std::int64_t t_len, std::int64_t d, std::int64_t hs,
                              const double* w_ih, const double* w_hh, bool reverse,
                              std::int64_t out_stride, const LstmTrace& trace, double* gx,
                              double* gw_ih, double* gw_hh, double* gbias) {
  const std::int64_t g4 = 4 * hs;
  std::vector<double> gh(static_cast<std::size_t>(n) * hs, 0.0);
  std::vector<double> gc(static_cast<std::size_t>(n) * hs, 0.0);
  std::vector<double> ggates(static_cast<std::size_t>(n) * g4);
  std::vector<double> gx_acc(static_cast<std::size_t>(n) * t_len * g4, 0.0);
  CMapMat whm(w_hh, g4, hs);
  for (std::int64_t step = t_len - 1; step >= 0; --step) {
    const std::int64_t t = reverse ? t_len - 1 - step : step;
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < hs; ++j) {
        const std::size_t idx = static_cast<std::size_t>((i * t_len + t) * hs + j);
        const double go_h = gh[i * hs + j] + gout[(i * t_len + t) * out_stride + j];
        const double gi = trace.i[idx], gf = trace.f[idx], gg = trace.g[idx],
                     go = trace.o[idx], tc = trace.tc[idx];
        const double c_prev = trace.c[idx];
        double gc_total = gc[i * hs + j] + go_h * go * (1.0 - tc * tc);
        const double d_i = gc_total * gg * gi * (1.0 - gi);
        const double d_f = gc_total * c_prev * gf * (1.0 - gf);
        const double d_g = gc_total * gi * (1.0 - gg * gg);
        const double d_o = go_h * tc * go * (1.0 - go);
        double* gg4 = ggates.data() + i * g4;
        gg4[j] = d_i;
        gg4[hs + j] = d_f;
        gg4[2 * hs + j] = d_g;
        gg4[3 * hs + j] = d_o;
        gc[i * hs + j] = gc_total * gf;  // to previous step
      }
    }
    // gh_prev = ggates * w_hh ; gbias += colsum; gw_hh += ggates^T * h_prev
    {
      MapMat ghm(gh.data(), n, hs);
      CMapMat ggm(ggates.data(), n, g4);
      ghm.noalias() = ggm * whm;
      if (gbias)
        for (std::int64_t i = 0; i < n; ++i)
          for (std::int64_t j = 0; j < g4; ++j) gbias[j] += ggates[i * g4 + j];
      if (gw_hh) {
        // h_prev gathered from the trace
        std::vector<double> hprev(static_cast<std::size_t>(n) * hs);
        for (std::int64_t i = 0; i < n; ++i)
          for (std::int64_t j = 0; j < hs; ++j)
            hprev[i * hs + j] = trace.hprev[static_cast<std::size_t>((i * t_len + t) * hs + j)];
        CMapMat hm(hprev.data(), n, hs);
        MapMat gwhm(gw_hh, g4, hs);
        gwhm.noalias() += ggm.transpose() * hm;
      }
    }
    for (std::int64_t i = 0; i < n; ++i)
      std::copy_n(ggates.data() + i * g4, g4, gx_acc.data() + (i * t_len + t) * g4);
  }
  // gx += gx_acc * w_ih ; gw_ih += gx_acc^T * x
  CMapMat gam(gx_acc.data(), n * t_len, g4);
  if (gx) {
    CMapMat wim(w_ih, g4, d);
    MapMat gxm(gx, n * t_len, d);
    gxm.noalias() += gam * wim;
  }
  if (gw_ih) {
    CMapMat xm(x, n * t_len, d);
    MapMat gwim(gw_ih, g4, d);
    gwim.noalias() += gam.transpose() * xm;
  }
}

}  // namespace detail

inline Var bilstm(const Var& x, const Var& wf_ih, const Var& wf_hh, const Var& bf,
                  const Var& wb_ih, const Var& wb_hh, const Var& bb) {
  const auto& xs = x.shape();
  require(xs.size() == 3, "bilstm: expected [N, T, D]");
  const std::int64_t n = xs[0], t_len = xs[1], d = xs[2];
  const std::int64_t hs = wf_hh.shape()[1];
  require(wf_ih.shape()[0] == 4 * hs && wf_ih.shape()[1] == d, "bilstm: w_ih mismatch");

  Tensor out({n, t_len, 2 * hs});
  auto tr_f = std::make_shared<detail::LstmTrace>();
  auto tr_b = std::make_shared<detail::LstmTrace>();
  detail::lstm_forward_dir(x.value().data(), n, t_len, d, hs, wf_ih.value().data(),
                           wf_hh.value().data(), bf.value().data(), false, out.data(),
                           2 * hs, tr_f.get());
  detail::lstm_forward_dir(x.value().data(), n, t_len, d, hs, wb_ih.value().data(),
                           wb_hh.value().data(), bb.value().data(), true, out.data() + hs,
                           2 * hs, tr_b.get());

  return detail::make_op(
      std::move(out), {x, wf_ih, wf_hh, bf, wb_ih, wb_hh, bb},
      [x, wf_ih, wf_hh, bf, wb_ih, wb_hh, bb, tr_f, tr_b, n, t_len, d, hs](Node& nd) mutable {
        double* gx = x.node()->requires_grad ? x.node()->ensure_grad().data() : nullptr;
        detail::lstm_backward_dir(
            x.value().data(), nd.grad.data(), n, t_len, d, hs, wf_ih.value().data(),
            wf_hh.value().data(), false, 2 * hs, *tr_f, gx,
            wf_ih.node()->requires_grad ? wf_ih.node()->ensure_grad().data() : nullptr,
            wf_hh.node()->requires_grad ? wf_hh.node()->ensure_grad().data() : nullptr,
            bf.node()->requires_grad ? bf.node()->ensure_grad().data() : nullptr);
        detail::lstm_backward_dir(
            x.value().data(), nd.grad.data() + hs, n, t_len, d, hs, wb_ih.value().data(),
            wb_hh.value().data(), true, 2 * hs, *tr_b, gx,
            wb_ih.node()->requires_grad ? wb_ih.node()->ensure_grad().data() : nullptr,
            wb_hh.node()->requires_grad ? wb_hh.node()->ensure_grad().data() : nullptr,
            bb.node()->requires_grad ? bb.node()->ensure_grad().data() : nullptr);
      });
}

// ---------------------------------------------------------------------------
// Sequence bridging ops
// ---------------------------------------------------------------------------

// [N, C, T, F] -> [N, T, C*F]: per-frame feature vectors for the recurrent layers.
inline Var to_sequence(const Var& x) {
  const auto& s = x.shape();
  require(s.size() == 4, "to_sequence: expected [N, C, T, F]");
  const std::int64_t n = s[0], c = s[1], t = s[2], f = s[3];
  Tensor out({n, t, c * f});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t ci = 0; ci < c; ++ci)
      for (std::int64_t ti = 0; ti < t; ++ti)
        std::copy_n(x.value().data() + ((i * c + ci) * t + ti) * f, f,
                    out.data() + (i * t + ti) * c * f + ci * f);
  return detail::make_op(std::move(out), {x}, [x, n, c, t, f](Node& nd) mutable {
    Tensor& g = x.node()->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t ci = 0; ci < c; ++ci)
        for (std::int64_t ti = 0; ti < t; ++ti) {
          const double* src = nd.grad.data() + (i * t + ti) * c * f + ci * f;
          double* dst = g.data() + ((i * c + ci) * t + ti) * f;
          for (std::int64_t k = 0; k < f; ++k) dst[k] += src[k];
        }
  });
}

// [N, T, C*F] -> [N, C, T, F]: inverse of to_sequence (used for the mask head).
inline Var from_sequence(const Var& x, std::int64_t c, std::int64_t f) {
  const auto& s = x.shape();
  require(s.size() == 3 && s[2] == c * f, "from_sequence: shape mismatch");
  const std::int64_t n = s[0], t = s[1];
  Tensor out({n, c, t, f});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t ci = 0; ci < c; ++ci)
      for (std::int64_t ti = 0; ti < t; ++ti)
        std::copy_n(x.value().data() + (i * t + ti) * c * f + ci * f, f,
                    out.data() + ((i * c + ci) * t + ti) * f);
  return detail::make_op(std::move(out), {x}, [x, n, c, t, f](Node& nd) mutable {
    Tensor& g = x.node()->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t ci = 0; ci < c; ++ci)
        for (std::int64_t ti = 0; ti < t; ++ti) {
          const double* src = nd.grad.data() + ((i * c + ci) * t + ti) * f;
          double* dst = g.data() + (i * t + ti) * c * f + ci * f;
          for (std::int64_t k = 0; k < f; ++k) dst[k] += src[k];
        }
  });
}

// Mean of per-frame values within each 1/30-s segment. x: [N, T] -> [N, S].
// frame_seg maps frame index -> segment index; every segment must be hit by
// at least one frame or it inherits the nearest earlier frame's segment mean.
inline Var segment_mean(const Var& x, const std::vector<std::int64_t>& frame_seg,
                        std::int64_t n_segments) {
  const auto& s = x.shape();
  require(s.size() == 2, "segment_mean: expected [N, T]");
  const std::int64_t n = s[0], t = s[1];
  require(static_cast<std::int64_t>(frame_seg.size()) == t, "segment_mean: map size");
  auto counts = std::make_shared<std::vector<double>>(n_segments, 0.0);
  for (auto seg : frame_seg) {
    require(seg >= 0 && seg < n_segments, "segment_mean: segment out of range");
    (*counts)[seg] += 1.0;
  }
  Tensor out({n, n_segments});
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t ti = 0; ti < t; ++ti)
      out.at(i, frame_seg[ti]) += x.value().at(i, ti);
    double last = 0.0;
    for (std::int64_t seg = 0; seg < n_segments; ++seg) {
      if ((*counts)[seg] > 0.0)
        last = out.at(i, seg) / (*counts)[seg];
      out.at(i, seg) = last;
    }
  }
  return detail::make_op(std::move(out), {x}, [x, frame_seg, counts, n, t](Node& nd) mutable {
    // gradients flow only to segments with frames; the copied tail segments
    // route their gradient to the donor segment
    const std::int64_t n_seg = static_cast<std::int64_t>(counts->size());
    Tensor& g = x.node()->ensure_grad();
    std::vector<double> seg_grad(static_cast<std::size_t>(n) * n_seg, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      std::int64_t donor = -1;
      for (std::int64_t seg = 0; seg < n_seg; ++seg) {
        if ((*counts)[seg] > 0.0) donor = seg;
        if (donor >= 0) seg_grad[i * n_seg + donor] += nd.grad[i * n_seg + seg];
      }
    }
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t ti = 0; ti < t; ++ti) {
        const std::int64_t seg = frame_seg[ti];
        g.at(i, ti) += seg_grad[i * n_seg + seg] / (*counts)[seg];
      }
  });
}

// Piecewise-constant expansion of per-segment values to samples. [N, S] -> [N, L].
inline Var expand_segments(const Var& x, std::int64_t n_samples, int rate) {
  const auto& s = x.shape();
  require(s.size() == 2, "expand_segments: expected [N, S]");
  const std::int64_t n = s[0], segs = s[1];
  require(segment_count(n_samples, rate) == segs, "expand_segments: coverage mismatch");
  Tensor out({n, n_samples});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t seg = 0; seg < segs; ++seg) {
      const std::int64_t lo = segment_boundary(seg, rate);
      const std::int64_t hi = std::min(n_samples, segment_boundary(seg + 1, rate));
      for (std::int64_t j = lo; j < hi; ++j) out.at(i, j) = x.value().at(i, seg);
    }
  return detail::make_op(std::move(out), {x}, [x, n, segs, n_samples, rate](Node& nd) mutable {
    Tensor& g = x.node()->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t seg = 0; seg < segs; ++seg) {
        const std::int64_t lo = segment_boundary(seg, rate);
        const std::int64_t hi = std::min(n_samples, segment_boundary(seg + 1, rate));
        double acc = 0.0;
        for (std::int64_t j = lo; j < hi; ++j) acc += nd.grad.at(i, j);
        g.at(i, seg) += acc;
      }
  });
}

// Differentiable STFT: [N, L] -> [N, 2, T, F] with the library's framing.
inline Var stft_op(const Var& x, const StftConfig& cfg) {
  const auto& s = x.shape();
  require(s.size() == 2, "stft_op: expected [N, L]");
  const std::int64_t n = s[0], len = s[1];
  const std::int64_t frames = cfg.frames_for(len);
  const std::int64_t f = cfg.bins();
  require(frames > 0, "stft_op: empty signal");
  auto win = std::make_shared<std::vector<double>>(hann_window(cfg.win_len));

  Tensor out({n, 2, frames, f});
  std::vector<double> buf(cfg.n_fft);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t t = 0; t < frames; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      const std::int64_t off = t * cfg.hop;
      for (int k = 0; k < cfg.win_len; ++k)
        if (off + k < len) buf[k] = x.value().at(i, off + k) * (*win)[k];
      auto spec = fft::rdft(buf);
      for (std::int64_t b = 0; b < f; ++b) {
        out.at(i, 0, t, b) = spec[b].real();
        out.at(i, 1, t, b) = spec[b].imag();
      }
    }
  return detail::make_op(std::move(out), {x}, [x, cfg, win, n, len, frames, f](Node& nd) mutable {
    Tensor& g = x.node()->ensure_grad();
    std::vector<fft::cd> gbins(cfg.n_fft);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t t = 0; t < frames; ++t) {
        std::fill(gbins.begin(), gbins.end(), fft::cd(0, 0));
        for (std::int64_t b = 0; b < f; ++b)
          gbins[b] = {nd.grad.at(i, 0, t, b), nd.grad.at(i, 1, t, b)};
        // adjoint of the truncated real DFT: Re(N * ifft(zero-padded grad))
        std::vector<fft::cd> adj = fft::ifft(gbins);
        const std::int64_t off = t * cfg.hop;
        for (int k = 0; k < cfg.win_len; ++k)
          if (off + k < len)
            g.at(i, off + k) += (*win)[k] * adj[k].real() * static_cast<double>(cfg.n_fft);
      }
  });
}

// ---------------------------------------------------------------------------
// Reductions / losses
// ---------------------------------------------------------------------------

// Per-item L2 norm of the flattened difference tensor, averaged over items.
inline Var batch_l2norm_mean(const Var& d) {
  const auto& s = d.shape();
  require(!s.empty() && s[0] > 0, "batch_l2norm_mean: empty batch");
  const std::int64_t n = s[0];
  const std::int64_t inner = d.value().numel() / n;
  auto norms = std::make_shared<std::vector<double>>(n, 0.0);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* p = d.value().data() + i * inner;
    for (std::int64_t k = 0; k < inner; ++k) acc += p[k] * p[k];
    (*norms)[i] = std::sqrt(acc);
    total += (*norms)[i];
  }
  Tensor out({1});
  out[0] = total / static_cast<double>(n);
  return detail::make_op(std::move(out), {d}, [d, norms, n, inner](Node& nd) mutable {
    Tensor& g = d.node()->ensure_grad();
    const double go = nd.grad[0] / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double inv = 1.0 / std::max((*norms)[i], 1e-12);
      const double* p = d.value().data() + i * inner;
      double* q = g.data() + i * inner;
      for (std::int64_t k = 0; k < inner; ++k) q[k] += go * p[k] * inv;
    }
  });
}

// Mean binary cross entropy; predictions clamped to [eps, 1-eps].
inline constexpr double kBceEps = 1e-7;

inline Var bce_mean(const Var& pred, const Tensor& target) {
  require(pred.value().same_shape(target), "bce_mean: shape mismatch");
  const std::int64_t n = pred.value().numel();
  require(n > 0, "bce_mean: empty input");
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(pred.value()[i], kBceEps, 1.0 - kBceEps);
    const double y = target[i];
    acc -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  Tensor out({1});
  out[0] = acc / static_cast<double>(n);
  auto tgt = std::make_shared<Tensor>(target);
  return detail::make_op(std::move(out), {pred}, [pred, tgt, n](Node& nd) mutable {
    Tensor& g = pred.node()->ensure_grad();
    const double go = nd.grad[0] / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double raw = pred.value()[i];
      if (raw <= kBceEps || raw >= 1.0 - kBceEps) continue;  // clamped: flat
      const double y = (*tgt)[i];
      g[i] += go * (-(y / raw) + (1.0 - y) / (1.0 - raw));
    }
  });
}

// Scalar probe: sum of the elementwise product with a fixed tensor.
inline Var weighted_sum(const Var& a, const Tensor& w) {
  require(a.value().same_shape(w), "weighted_sum: shape mismatch");
  double acc = 0.0;
  for (std::int64_t i = 0; i < w.numel(); ++i) acc += a.value()[i] * w[i];
  Tensor out({1});
  out[0] = acc;
  auto wt = std::make_shared<Tensor>(w);
  return detail::make_op(std::move(out), {a}, [a, wt](Node& n) mutable {
    Tensor& g = a.node()->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[0] * (*wt)[i];
  });
}

inline Var add_scalar_weighted(const Var& a, const Var& b, double wa, double wb) {
  require(a.value().numel() == 1 && b.value().numel() == 1, "expected scalars");
  Tensor out({1});
  out[0] = wa * a.value()[0] + wb * b.value()[0];
  return detail::make_op(std::move(out), {a, b}, [a, b, wa, wb](Node& n) mutable {
    if (a.node()->requires_grad) a.node()->ensure_grad()[0] += wa * n.grad[0];
    if (b.node()->requires_grad) b.node()->ensure_grad()[0] += wb * n.grad[0];
  });
}

}  // namespace hush::nn
