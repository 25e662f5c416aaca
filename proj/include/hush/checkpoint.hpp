// checkpoint.hpp — model archive: JSON metadata header + raw float64 tensors.

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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "hush/models.hpp"

namespace hush {

inline constexpr const char* kCheckpointMagic = "HUSHCKPT";
inline constexpr const char* kCheckpointVersion = "1";

inline nlohmann::json specs_to_json(const ModelSpecs& s) {
  return nlohmann::json{
      {"sid",
       {{"conv_filters", s.sid.conv_filters},
        {"conv_out", s.sid.conv_out},
        {"lstm_hidden", s.sid.lstm_hidden},
        {"fc_hidden", s.sid.fc_hidden},
        {"freq_bins", s.sid.freq_bins}}},
      {"est", {{"base_filters", s.est.base_filters}}},
      {"rem",
       {{"filters", s.rem.filters},
        {"enc_out", s.rem.enc_out},
        {"lstm_hidden", s.rem.lstm_hidden},
        {"fc_hidden", s.rem.fc_hidden},
        {"freq_bins", s.rem.freq_bins}}},
      {"stft",
       {{"n_fft", s.stft_cfg.n_fft},
        {"win_len", s.stft_cfg.win_len},
        {"hop", s.stft_cfg.hop},
        {"sample_rate", s.stft_cfg.sample_rate}}}};
}

inline ModelSpecs specs_from_json(const nlohmann::json& j) {
  ModelSpecs s;
  s.sid.conv_filters = j.at("sid").at("conv_filters").get<std::int64_t>();
  s.sid.conv_out = j.at("sid").at("conv_out").get<std::int64_t>();
  s.sid.lstm_hidden = j.at("sid").at("lstm_hidden").get<std::int64_t>();
  s.sid.fc_hidden = j.at("sid").at("fc_hidden").get<std::int64_t>();
  s.sid.freq_bins = j.at("sid").at("freq_bins").get<std::int64_t>();
  s.est.base_filters = j.at("est").at("base_filters").get<std::int64_t>();
  s.rem.filters = j.at("rem").at("filters").get<std::int64_t>();
  s.rem.enc_out = j.at("rem").at("enc_out").get<std::int64_t>();
  s.rem.lstm_hidden = j.at("rem").at("lstm_hidden").get<std::int64_t>();
  s.rem.fc_hidden = j.at("rem").at("fc_hidden").get<std::int64_t>();
  s.rem.freq_bins = j.at("rem").at("freq_bins").get<std::int64_t>();
  s.stft_cfg.n_fft = j.at("stft").at("n_fft").get<int>();
  s.stft_cfg.win_len = j.at("stft").at("win_len").get<int>();
  s.stft_cfg.hop = j.at("stft").at("hop").get<int>();
  s.stft_cfg.sample_rate = j.at("stft").at("sample_rate").get<int>();
  return s;
}

struct CheckpointMeta {
  std::string version = kCheckpointVersion;
  std::string phase;
  std::uint64_t seed = 0;
  nlohmann::json extra;  // optimizer settings, epoch, rng state, ...
};

// Write-temp-then-rename; a reader never sees a partial file.
inline void save_checkpoint(const std::string& path, DenoiserModel& model,
                            const CheckpointMeta& meta) {
  nlohmann::json hdr;
  hdr["version"] = meta.version;
  hdr["phase"] = meta.phase;
  hdr["seed"] = meta.seed;
  hdr["specs"] = specs_to_json(model.specs());
  hdr["extra"] = meta.extra;

  auto params = model.named_parameters();
  auto buffers = model.named_buffers();
  nlohmann::json dir = nlohmann::json::array();
  for (auto& [name, v] : params)
    dir.push_back({{"name", name}, {"shape", v.value().shape()}, {"kind", "param"}});
  for (auto& [name, t] : buffers)
    dir.push_back({{"name", name}, {"shape", t->shape()}, {"kind", "buffer"}});
  hdr["tensors"] = dir;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("save_checkpoint: cannot open " + tmp);
    const std::string h = hdr.dump();
    const std::uint64_t hlen = h.size();
    os.write(kCheckpointMagic, 8);
    os.write(reinterpret_cast<const char*>(&hlen), 8);
    os.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (auto& [name, v] : params)
      os.write(reinterpret_cast<const char*>(v.value().data()),
               static_cast<std::streamsize>(v.value().numel() * sizeof(double)));
    for (auto& [name, t] : buffers)
      os.write(reinterpret_cast<const char*>(t->data()),
               static_cast<std::streamsize>(t->numel() * sizeof(double)));
    if (!os) throw IoError("save_checkpoint: short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

struct LoadedCheckpoint {
  std::unique_ptr<DenoiserModel> model;
  CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("load_checkpoint: cannot open " + path);
  char magic[8];
  std::uint64_t hlen = 0;
  is.read(magic, 8);
  is.read(reinterpret_cast<char*>(&hlen), 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw CheckpointError("load_checkpoint: bad magic in " + path);
  std::string h(hlen, '\0');
  is.read(h.data(), static_cast<std::streamsize>(hlen));
  nlohmann::json hdr = nlohmann::json::parse(h, nullptr, false);
  if (hdr.is_discarded()) throw CheckpointError("load_checkpoint: bad header in " + path);
  if (hdr.at("version").get<std::string>() != kCheckpointVersion)
    throw CheckpointError("load_checkpoint: unsupported version in " + path);

  LoadedCheckpoint out;
  out.meta.version = hdr.at("version").get<std::string>();
  out.meta.phase = hdr.at("phase").get<std::string>();
  out.meta.seed = hdr.at("seed").get<std::uint64_t>();
  out.meta.extra = hdr.value("extra", nlohmann::json::object());
  const ModelSpecs specs = specs_from_json(hdr.at("specs"));
  out.model = std::make_unique<DenoiserModel>(specs, out.meta.seed);

  std::map<std::string, double*> slots;
  std::map<std::string, std::int64_t> sizes;
  for (auto& [name, v] : out.model->named_parameters()) {
    slots[name] = v.value().data();
    sizes[name] = v.value().numel();
  }
  for (auto& [name, t] : out.model->named_buffers()) {
    slots[name] = t->data();
    sizes[name] = t->numel();
  }
  for (const auto& entry : hdr.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    std::int64_t numel = 1;
    for (auto d : entry.at("shape").get<std::vector<std::int64_t>>()) numel *= d;
    auto it = slots.find(name);
    if (it == slots.end() || sizes[name] != numel)
      throw CheckpointError("load_checkpoint: tensor mismatch for " + name);
    is.read(reinterpret_cast<char*>(it->second),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!is) throw CheckpointError("load_checkpoint: truncated data in " + path);
  }
  return out;
}

}  // namespace hush
