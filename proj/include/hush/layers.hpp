// layers.hpp — parameterized building blocks over the autograd ops.

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

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hush/autograd.hpp"
#include "hush/common.hpp"
#include "hush/tensor.hpp"

namespace hush::nn {

// Ordered parameter/buffer registry. Names are stable and used for
// checkpointing, freezing, and weight hashing.
class ParamStore {
 public:
  Var parameter(const std::string& name, Tensor init) {
    Var v(std::move(init), /*requires_grad=*/true);
    params_.emplace_back(name, v);
    return v;
  }

  std::shared_ptr<Tensor> buffer(const std::string& name, Tensor init) {
    auto t = std::make_shared<Tensor>(std::move(init));
    buffers_.emplace_back(name, t);
    return t;
  }

  std::vector<std::pair<std::string, Var>>& params() { return params_; }
  const std::vector<std::pair<std::string, Var>>& params() const { return params_; }
  const std::vector<std::pair<std::string, std::shared_ptr<Tensor>>>& buffers() const {
    return buffers_;
  }

  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (const auto& [name, v] : params_) n += v.value().numel();
    return n;
  }

 private:
  std::vector<std::pair<std::string, Var>> params_;
  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> buffers_;
};

// Fan-in-scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline Tensor fan_in_uniform(std::vector<std::int64_t> shape, std::int64_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::int64_t>(1, fan_in)));
  return Tensor::uniform(std::move(shape), -bound, bound, rng);
}

struct Conv2d {
  Var w, b;
  Conv2dGeom geom;

  Conv2d() = default;
  Conv2d(ParamStore& store, const std::string& name, std::int64_t cin, std::int64_t cout,
         std::int64_t kh, std::int64_t kw, std::int64_t sh, std::int64_t sw, std::int64_t dh,
         std::int64_t dw, Rng& rng) {
    geom.kh = kh;
    geom.kw = kw;
    geom.sh = sh;
    geom.sw = sw;
    geom.dh = dh;
    geom.dw = dw;
    // "same"-style padding for stride 1; halves the grid for stride 2
    geom.ph = dh * (kh - 1) / 2;
    geom.pw = dw * (kw - 1) / 2;
    const std::int64_t fan_in = cin * kh * kw;
    w = store.parameter(name + ".w", fan_in_uniform({cout, cin, kh, kw}, fan_in, rng));
    b = store.parameter(name + ".b", fan_in_uniform({cout}, fan_in, rng));
  }

  Var forward(const Var& x) const { return conv2d(x, w, b, geom); }
};

struct ConvTranspose2d {
  Var w, b;
  Conv2dGeom geom;

  ConvTranspose2d() = default;
  ConvTranspose2d(ParamStore& store, const std::string& name, std::int64_t cin,
                  std::int64_t cout, std::int64_t k, std::int64_t stride, Rng& rng) {
    geom.kh = geom.kw = k;
    geom.sh = geom.sw = stride;
    geom.ph = geom.pw = (k - 1) / 2;
    const std::int64_t fan_in = cin * k * k;
    w = store.parameter(name + ".w", fan_in_uniform({cin, cout, k, k}, fan_in, rng));
    b = store.parameter(name + ".b", fan_in_uniform({cout}, fan_in, rng));
  }

  Var forward(const Var& x, std::int64_t out_h, std::int64_t out_w) const {
    return conv_transpose2d(x, w, b, geom, out_h, out_w);
  }
};

struct BatchNorm2d {
  Var gamma, beta;
  std::shared_ptr<Tensor> running_mean, running_var;

  BatchNorm2d() = default;
  BatchNorm2d(ParamStore& store, const std::string& name, std::int64_t c) {
    gamma = store.parameter(name + ".gamma", Tensor::full({c}, 1.0));
    beta = store.parameter(name + ".beta", Tensor::zeros({c}));
    running_mean = store.buffer(name + ".running_mean", Tensor::zeros({c}));
    running_var = store.buffer(name + ".running_var", Tensor::full({c}, 1.0));
  }

  Var forward(const Var& x, bool training) const {
    return batchnorm2d(x, gamma, beta, running_mean, running_var, training);
  }
};

struct Linear {
  Var w, b;

  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out,
         Rng& rng) {
    w = store.parameter(name + ".w", fan_in_uniform({out, in}, in, rng));
    b = store.parameter(name + ".b", fan_in_uniform({out}, in, rng));
  }

  Var forward(const Var& x) const { return linear(x, w, b); }
};

struct BiLstm {
  Var wf_ih, wf_hh, bf, wb_ih, wb_hh, bb;
  std::int64_t hidden = 0;

  BiLstm() = default;
  BiLstm(ParamStore& store, const std::string& name, std::int64_t input, std::int64_t hidden_,
         Rng& rng)
      : hidden(hidden_) {
    const std::int64_t h = hidden_;
    wf_ih = store.parameter(name + ".fwd.w_ih", fan_in_uniform({4 * h, input}, h, rng));
    wf_hh = store.parameter(name + ".fwd.w_hh", fan_in_uniform({4 * h, h}, h, rng));
    bf = store.parameter(name + ".fwd.b", fan_in_uniform({4 * h}, h, rng));
    wb_ih = store.parameter(name + ".bwd.w_ih", fan_in_uniform({4 * h, input}, h, rng));
    wb_hh = store.parameter(name + ".bwd.w_hh", fan_in_uniform({4 * h, h}, h, rng));
    bb = store.parameter(name + ".bwd.b", fan_in_uniform({4 * h}, h, rng));
  }

  Var forward(const Var& x) const { return bilstm(x, wf_ih, wf_hh, bf, wb_ih, wb_hh, bb); }
};

// Conv -> BatchNorm -> ReLU, the block used throughout the encoders.
struct ConvBnRelu {
  Conv2d conv;
  BatchNorm2d bn;

  ConvBnRelu() = default;
  ConvBnRelu(ParamStore& store, const std::string& name, std::int64_t cin, std::int64_t cout,
             std::int64_t kh, std::int64_t kw, std::int64_t sh, std::int64_t sw,
             std::int64_t dh, std::int64_t dw, Rng& rng)
      : conv(store, name + ".conv", cin, cout, kh, kw, sh, sw, dh, dw, rng),
        bn(store, name + ".bn", cout) {}

  Var forward(const Var& x, bool training) const {
    return relu(bn.forward(conv.forward(x), training));
  }
};

}  // namespace hush::nn
