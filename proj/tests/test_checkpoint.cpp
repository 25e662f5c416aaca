// test_checkpoint.cpp

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

#include <fstream>

#include "hush/checkpoint.hpp"
#include "hush/desk.hpp"

using namespace hush;

namespace {

ModelSpecs small_specs() {
  ModelSpecs s = desk::model_specs();
  s.sid.conv_filters = 2;
  s.sid.conv_out = 1;
  s.sid.lstm_hidden = 3;
  s.sid.fc_hidden = 3;
  s.sid.freq_bins = 32;
  s.est.base_filters = 2;
  s.rem.filters = 2;
  s.rem.enc_out = 2;
  s.rem.lstm_hidden = 3;
  s.rem.fc_hidden = 4;
  s.rem.freq_bins = 32;
  return s;
}

}  // namespace

TEST_CASE("checkpoint round trip is lossless") {
  ModelSpecs specs = small_specs();
  DenoiserModel model(specs, 99);
  // touch a running stat so buffers are non-trivial
  (*model.n().store().buffers().front().second)[0] = 0.25;

  CheckpointMeta meta;
  meta.phase = "sid";
  meta.seed = 99;
  meta.extra = {{"epoch", 3}};
  const std::string path = "/tmp/hush_ckpt_rt.ckpt";
  save_checkpoint(path, model, meta);

  LoadedCheckpoint loaded = load_checkpoint(path);
  REQUIRE(loaded.meta.phase == "sid");
  REQUIRE(loaded.meta.seed == 99);
  REQUIRE(loaded.meta.extra.at("epoch").get<int>() == 3);
  REQUIRE(loaded.model->specs() == specs);

  auto a = model.named_parameters();
  auto b = loaded.model->named_parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].first == b[i].first);
    REQUIRE(a[i].second.value().vec() == b[i].second.value().vec());
  }
  auto ba = model.named_buffers();
  auto bb = loaded.model->named_buffers();
  REQUIRE(ba.size() == bb.size());
  for (std::size_t i = 0; i < ba.size(); ++i)
    REQUIRE(ba[i].second->vec() == bb[i].second->vec());

  // save -> load -> save produces identical bytes
  const std::string path2 = "/tmp/hush_ckpt_rt2.ckpt";
  save_checkpoint(path2, *loaded.model, loaded.meta);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  REQUIRE(s1 == s2);
}

TEST_CASE("checkpoint rejects garbage and truncation") {
  const std::string path = "/tmp/hush_ckpt_bad.ckpt";
  std::ofstream(path) << "not a checkpoint";
  REQUIRE_THROWS_AS(load_checkpoint(path), CheckpointError);
  REQUIRE_THROWS_AS(load_checkpoint("/tmp/hush_ckpt_missing.ckpt"), CheckpointError);

  // truncate a valid checkpoint
  ModelSpecs specs = small_specs();
  DenoiserModel model(specs, 1);
  save_checkpoint("/tmp/hush_ckpt_full.ckpt", model, {});
  std::ifstream in("/tmp/hush_ckpt_full.ckpt", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream("/tmp/hush_ckpt_trunc.ckpt", std::ios::binary)
      << bytes.substr(0, bytes.size() / 2);
  REQUIRE_THROWS_AS(load_checkpoint("/tmp/hush_ckpt_trunc.ckpt"), CheckpointError);
}

TEST_CASE("checkpoint save is atomic (no tmp file left behind)") {
  ModelSpecs specs = small_specs();
  DenoiserModel model(specs, 2);
  const std::string path = "/tmp/hush_ckpt_atomic.ckpt";
  save_checkpoint(path, model, {});
  REQUIRE(std::filesystem::exists(path));
  REQUIRE_FALSE(std::filesystem::exists(path + ".tmp"));
}
