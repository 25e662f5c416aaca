// test_layers.cpp

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

#include "hush/layers.hpp"

using namespace hush;
using namespace hush::nn;

TEST_CASE("Conv2d keeps the grid for stride 1 and halves it for stride 2") {
  Rng rng(1);
  ParamStore store;
  Conv2d same(store, "same", 2, 4, 5, 5, 1, 1, 2, 2, rng);
  Var x(Tensor::uniform({1, 2, 11, 13}, -1, 1, rng));
  Var y = same.forward(x);
  REQUIRE(y.shape() == std::vector<std::int64_t>{1, 4, 11, 13});

  Conv2d down(store, "down", 2, 4, 5, 5, 2, 2, 1, 1, rng);
  Var z = down.forward(x);
  REQUIRE(z.shape() == std::vector<std::int64_t>{1, 4, 6, 7});
}

TEST_CASE("ConvTranspose2d doubles the grid back to an exact target") {
  Rng rng(2);
  ParamStore store;
  ConvTranspose2d up(store, "up", 4, 2, 3, 2, rng);
  Var x(Tensor::uniform({1, 4, 6, 7}, -1, 1, rng));
  Var y = up.forward(x, 11, 13);
  REQUIRE(y.shape() == std::vector<std::int64_t>{1, 2, 11, 13});
  Var y2 = up.forward(x, 12, 14);
  REQUIRE(y2.shape() == std::vector<std::int64_t>{1, 2, 12, 14});
  REQUIRE_THROWS_AS(up.forward(x, 20, 20), ArgumentError);
}

TEST_CASE("ConvBnRelu output is nonnegative and finite") {
  Rng rng(3);
  ParamStore store;
  ConvBnRelu block(store, "b", 2, 3, 3, 3, 1, 1, 1, 1, rng);
  Var x(Tensor::uniform({2, 2, 6, 6}, -2, 2, rng));
  Var y = block.forward(x, true);
  for (double v : y.value().vec()) {
    REQUIRE(v >= 0.0);
    REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("BiLstm output concatenates both directions") {
  Rng rng(4);
  ParamStore store;
  BiLstm lstm(store, "l", 3, 5, rng);
  Var x(Tensor::uniform({2, 7, 3}, -1, 1, rng));
  Var y = lstm.forward(x);
  REQUIRE(y.shape() == std::vector<std::int64_t>{2, 7, 10});
  for (double v : y.value().vec()) REQUIRE(std::abs(v) < 1.0);  // tanh-bounded
}

TEST_CASE("ParamStore names are unique and ordered") {
  Rng rng(5);
  ParamStore store;
  Linear l1(store, "a", 3, 4, rng);
  Linear l2(store, "b", 4, 2, rng);
  REQUIRE(store.params().size() == 4);
  REQUIRE(store.params()[0].first == "a.w");
  REQUIRE(store.params()[1].first == "a.b");
  REQUIRE(store.params()[2].first == "b.w");
  REQUIRE(store.params()[3].first == "b.b");
  REQUIRE(store.param_count() == 3 * 4 + 4 + 4 * 2 + 2);
}
