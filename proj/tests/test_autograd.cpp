// test_autograd.cpp — finite-difference checks for every differentiable op.

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

#include <catch2/catch_amalgamated.hpp>

#include "hush/autograd.hpp"
#include "hush/layers.hpp"

using namespace hush;
using namespace hush::nn;

namespace {

Tensor rand_tensor(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0,
                   double hi = 1.0) {
  return Tensor::uniform(std::move(shape), lo, hi, rng);
}

// Central finite differences vs backprop on sampled coordinates of `leaf`.
// `f` must rebuild the graph from the leaf values on each call.
double max_rel_grad_error(Var& leaf, const std::function<Var()>& f, double h = 1e-4,
                          int max_coords = 64) {
  Var loss = f();
  leaf.grad().fill(0.0);
  backward(loss);
  Tensor analytic = leaf.grad();

  double worst = 0.0;
  const std::int64_t n = leaf.value().numel();
  const std::int64_t step = std::max<std::int64_t>(1, n / max_coords);
  for (std::int64_t i = 0; i < n; i += step) {
    const double keep = leaf.value()[i];
    leaf.value()[i] = keep + h;
    const double up = f().value()[0];
    leaf.value()[i] = keep - h;
    const double dn = f().value()[0];
    leaf.value()[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("gradients: elementwise ops") {
  Rng rng(1);
  Var a(rand_tensor({3, 4}, rng), true);
  Var b(rand_tensor({3, 4}, rng), true);
  Tensor probe = rand_tensor({3, 4}, rng);

  SECTION("add/sub/mul/scale") {
    auto f = [&] {
      return weighted_sum(scale(add(mul(a, b), sub(a, b)), 1.7), probe);
    };
    REQUIRE(max_rel_grad_error(a, f) < 1e-6);
    REQUIRE(max_rel_grad_error(b, f) < 1e-6);
  }
  SECTION("sigmoid") {
    auto f = [&] { return weighted_sum(sigmoid(a), probe); };
    REQUIRE(max_rel_grad_error(a, f) < 1e-6);
  }
  SECTION("relu away from kinks") {
    for (auto& v : a.value().vec())
      if (std::abs(v) < 0.05) v = 0.1;
    auto f = [&] { return weighted_sum(relu(a), probe); };
    REQUIRE(max_rel_grad_error(a, f) < 1e-6);
  }
}

TEST_CASE("gradients: concat and slice") {
  Rng rng(2);
  Var a(rand_tensor({2, 2, 3, 3}, rng), true);
  Var b(rand_tensor({2, 3, 3, 3}, rng), true);
  Tensor probe = rand_tensor({2, 5, 3, 3}, rng);
  auto f = [&] { return weighted_sum(concat_channels(a, b), probe); };
  REQUIRE(max_rel_grad_error(a, f) < 1e-6);
  REQUIRE(max_rel_grad_error(b, f) < 1e-6);

  Tensor probe2 = rand_tensor({2, 2, 3, 3}, rng);
  auto g = [&] { return weighted_sum(slice_channels(b, 1, 3), probe2); };
  REQUIRE(max_rel_grad_error(b, g) < 1e-6);
}

TEST_CASE("gradients: linear") {
  Rng rng(3);
  Var x(rand_tensor({5, 4}, rng), true);
  Var w(rand_tensor({3, 4}, rng), true);
  Var b(rand_tensor({3}, rng), true);
  Tensor probe = rand_tensor({5, 3}, rng);
  auto f = [&] { return weighted_sum(linear(x, w, b), probe); };
  REQUIRE(max_rel_grad_error(x, f) < 1e-6);
  REQUIRE(max_rel_grad_error(w, f) < 1e-6);
  REQUIRE(max_rel_grad_error(b, f) < 1e-6);
}

TEST_CASE("gradients: conv2d with stride and dilation") {
  Rng rng(4);
  Var x(rand_tensor({2, 3, 7, 8}, rng), true);
  Var w(rand_tensor({4, 3, 3, 3}, rng), true);
  Var b(rand_tensor({4}, rng), true);
  for (auto [sh, sw, dh, dw] : {std::array<int, 4>{1, 1, 1, 1}, {2, 2, 1, 1}, {1, 1, 2, 2},
                                {2, 1, 1, 2}}) {
    Conv2dGeom g{3, 3, sh, sw, dh, dw, dh * (3 - 1) / 2, dw * (3 - 1) / 2};
    Tensor probe = rand_tensor({2, 4, g.out_h(7), g.out_w(8)}, rng);
    auto f = [&] { return weighted_sum(conv2d(x, w, b, g), probe); };
    CAPTURE(sh, sw, dh, dw);
    REQUIRE(max_rel_grad_error(x, f) < 1e-6);
    REQUIRE(max_rel_grad_error(w, f) < 1e-6);
    REQUIRE(max_rel_grad_error(b, f) < 1e-6);
  }
}

TEST_CASE("gradients: conv_transpose2d stride-2 upsampling") {
  Rng rng(5);
  Var x(rand_tensor({2, 4, 4, 5}, rng), true);
  Var w(rand_tensor({4, 3, 3, 3}, rng), true);
  Var b(rand_tensor({3}, rng), true);
  Conv2dGeom g{3, 3, 2, 2, 1, 1, 1, 1};
  // both parities of the target size are valid
  for (std::int64_t out_h : {7LL, 8LL}) {
    Tensor probe = rand_tensor({2, 3, out_h, 9}, rng);
    auto f = [&] { return weighted_sum(conv_transpose2d(x, w, b, g, out_h, 9), probe); };
    CAPTURE(out_h);
    REQUIRE(max_rel_grad_error(x, f) < 1e-6);
    REQUIRE(max_rel_grad_error(w, f) < 1e-6);
    REQUIRE(max_rel_grad_error(b, f) < 1e-6);
  }
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  // <conv(x), y> == <x, convT(y)> for bias-free kernels
  Rng rng(6);
  Conv2dGeom g{3, 3, 2, 2, 1, 1, 1, 1};
  Tensor xt = rand_tensor({1, 2, 9, 9}, rng);
  Tensor wt = rand_tensor({3, 2, 3, 3}, rng);
  Tensor yt = rand_tensor({1, 3, g.out_h(9), g.out_w(9)}, rng);
  Var x(xt), w(wt), y(yt);
  Var cx = conv2d(x, w, Var(), g);
  double lhs = 0.0;
  for (std::int64_t i = 0; i < cx.value().numel(); ++i) lhs += cx.value()[i] * yt[i];
  // convT weight layout is [Cin, Cout, kh, kw]: the conv weight reinterpreted
  Var ty = conv_transpose2d(y, Var(wt.reshaped({3, 2, 3, 3})), Var(), g, 9, 9);
  double rhs = 0.0;
  for (std::int64_t i = 0; i < ty.value().numel(); ++i) rhs += ty.value()[i] * xt[i];
  REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("gradients: batchnorm2d train and eval") {
  Rng rng(7);
  Var x(rand_tensor({3, 2, 4, 5}, rng), true);
  Var gamma(rand_tensor({2}, rng, 0.5, 1.5), true);
  Var beta(rand_tensor({2}, rng), true);
  for (bool training : {true, false}) {
    auto rm = std::make_shared<Tensor>(Tensor::zeros({2}));
    auto rv = std::make_shared<Tensor>(Tensor::full({2}, 1.0));
    (*rm)[0] = 0.1;
    (*rm)[1] = -0.2;
    (*rv)[0] = 0.9;
    (*rv)[1] = 1.3;
    Tensor probe = rand_tensor({3, 2, 4, 5}, rng);
    // fresh running-stat copies inside f so eval mode sees fixed stats
    auto f = [&, rm, rv] {
      auto rm2 = std::make_shared<Tensor>(*rm);
      auto rv2 = std::make_shared<Tensor>(*rv);
      return weighted_sum(batchnorm2d(x, gamma, beta, rm2, rv2, training), probe);
    };
    CAPTURE(training);
    REQUIRE(max_rel_grad_error(x, f) < 1e-5);
    REQUIRE(max_rel_grad_error(gamma, f) < 1e-6);
    REQUIRE(max_rel_grad_error(beta, f) < 1e-6);
  }
}

TEST_CASE("batchnorm2d updates running statistics in training mode only") {
  Rng rng(8);
  Var x(rand_tensor({4, 1, 3, 3}, rng, 1.0, 3.0));
  Var gamma(Tensor::full({1}, 1.0)), beta(Tensor::zeros({1}));
  auto rm = std::make_shared<Tensor>(Tensor::zeros({1}));
  auto rv = std::make_shared<Tensor>(Tensor::full({1}, 1.0));
  batchnorm2d(x, gamma, beta, rm, rv, true);
  REQUIRE((*rm)[0] > 0.0);  // moved toward the batch mean (~2)
  Tensor rm_after = *rm;
  batchnorm2d(x, gamma, beta, rm, rv, false);
  REQUIRE((*rm)[0] == rm_after[0]);
}

TEST_CASE("gradients: bilstm") {
  Rng rng(9);
  const std::int64_t n = 2, t = 5, d = 3, h = 4;
  Var x(rand_tensor({n, t, d}, rng), true);
  Var wf_ih(rand_tensor({4 * h, d}, rng, -0.5, 0.5), true);
  Var wf_hh(rand_tensor({4 * h, h}, rng, -0.5, 0.5), true);
  Var bf(rand_tensor({4 * h}, rng, -0.2, 0.2), true);
  Var wb_ih(rand_tensor({4 * h, d}, rng, -0.5, 0.5), true);
  Var wb_hh(rand_tensor({4 * h, h}, rng, -0.5, 0.5), true);
  Var bb(rand_tensor({4 * h}, rng, -0.2, 0.2), true);
  Tensor probe = rand_tensor({n, t, 2 * h}, rng);
  auto f = [&] { return weighted_sum(bilstm(x, wf_ih, wf_hh, bf, wb_ih, wb_hh, bb), probe); };
  REQUIRE(max_rel_grad_error(x, f) < 1e-5);
  REQUIRE(max_rel_grad_error(wf_ih, f) < 1e-5);
  REQUIRE(max_rel_grad_error(wf_hh, f) < 1e-5);
  REQUIRE(max_rel_grad_error(bf, f) < 1e-5);
  REQUIRE(max_rel_grad_error(wb_ih, f) < 1e-5);
  REQUIRE(max_rel_grad_error(wb_hh, f) < 1e-5);
  REQUIRE(max_rel_grad_error(bb, f) < 1e-5);
}

TEST_CASE("gradients: sequence bridges") {
  Rng rng(10);
  Var x(rand_tensor({2, 3, 4, 5}, rng), true);
  Tensor probe = rand_tensor({2, 4, 15}, rng);
  auto f = [&] { return weighted_sum(to_sequence(x), probe); };
  REQUIRE(max_rel_grad_error(x, f) < 1e-6);

  Var seq(rand_tensor({2, 4, 15}, rng), true);
  Tensor probe2 = rand_tensor({2, 3, 4, 5}, rng);
  auto g = [&] { return weighted_sum(from_sequence(seq, 3, 5), probe2); };
  REQUIRE(max_rel_grad_error(seq, g) < 1e-6);

  // round trip is the identity
  Var rt = from_sequence(to_sequence(x), 3, 5);
  REQUIRE(rt.value().vec() == x.value().vec());
}

TEST_CASE("gradients: segment_mean and expand_segments") {
  Rng rng(11);
  const std::int64_t n = 2, t = 9, segs = 4;
  std::vector<std::int64_t> map = {0, 0, 1, 1, 1, 2, 2, 3, 3};
  Var x(rand_tensor({n, t}, rng), true);
  Tensor probe = rand_tensor({n, segs}, rng);
  auto f = [&] { return weighted_sum(segment_mean(x, map, segs), probe); };
  REQUIRE(max_rel_grad_error(x, f) < 1e-6);

  const std::int64_t samples = 1600;  // 3 segments at 16 kHz
  Var conf(rand_tensor({2, segment_count(samples, 16000)}, rng, 0.1, 0.9), true);
  Tensor probe2 = rand_tensor({2, samples}, rng);
  auto g = [&] { return weighted_sum(expand_segments(conf, samples, 16000), probe2); };
  REQUIRE(max_rel_grad_error(conf, g) < 1e-6);
}

TEST_CASE("segment_mean averages frames within segments") {
  Tensor x({1, 4}, {1.0, 3.0, 5.0, 9.0});
  std::vector<std::int64_t> map = {0, 0, 1, 1};
  Var v(x);
  Var out = segment_mean(v, map, 2);
  REQUIRE(out.value().at(0, 0) == 2.0);
  REQUIRE(out.value().at(0, 1) == 7.0);
}

TEST_CASE("gradients: stft_op matches the plain stft") {
  Rng rng(12);
  StftConfig cfg;
  const std::int64_t len = 1200;
  Var x(rand_tensor({1, len}, rng), true);
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = x.value().vec();
  Spectrogram s = stft(w, cfg);
  Var sv = stft_op(x, cfg);
  REQUIRE(sv.shape() == std::vector<std::int64_t>{1, 2, s.frames(), s.bins()});
  for (std::int64_t i = 0; i < s.data.numel(); ++i)
    REQUIRE(sv.value()[i] == Catch::Approx(s.data[i]).margin(1e-12));

  Tensor probe = rand_tensor(sv.shape(), rng);
  auto f = [&] { return weighted_sum(stft_op(x, cfg), probe); };
  REQUIRE(max_rel_grad_error(x, f, 1e-3, 24) < 1e-5);
}

TEST_CASE("gradients: batch_l2norm_mean and bce_mean") {
  Rng rng(13);
  Var d(rand_tensor({3, 4, 2}, rng), true);
  auto f = [&] { return batch_l2norm_mean(d); };
  REQUIRE(max_rel_grad_error(d, f) < 1e-6);

  Var p(rand_tensor({2, 6}, rng, 0.05, 0.95), true);
  Tensor target({2, 6});
  Rng rng2(14);
  std::uniform_int_distribution<int> bit(0, 1);
  for (auto& v : target.vec()) v = bit(rng2);
  auto g = [&] { return bce_mean(p, target); };
  REQUIRE(max_rel_grad_error(p, g) < 1e-6);
}

TEST_CASE("bce_mean analytic values") {
  Tensor target({1, 4}, {1.0, 0.0, 1.0, 0.0});
  Var exact(Tensor({1, 4}, {1.0, 0.0, 1.0, 0.0}));
  REQUIRE(bce_mean(exact, target).value()[0] < 1e-6);
  Var half(Tensor::full({1, 4}, 0.5));
  REQUIRE(bce_mean(half, target).value()[0] == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("backward accumulates through shared subexpressions") {
  Var a(Tensor({1}, {3.0}), true);
  Var y = mul(a, a);
  backward(weighted_sum(y, Tensor::full({1}, 1.0)));
  REQUIRE(a.grad()[0] == Catch::Approx(6.0));  // d(a^2)/da = 2a
}

TEST_CASE("weight init is fan-in bounded and seeded") {
  Rng rng(15);
  Tensor t = fan_in_uniform({8, 4}, 16, rng);
  for (double v : t.vec()) REQUIRE(std::abs(v) <= 0.25);
  Rng rng2(15);
  Tensor t2 = fan_in_uniform({8, 4}, 16, rng2);
  REQUIRE(t.vec() == t2.vec());
}
