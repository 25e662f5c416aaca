// datagen.hpp — supervised mixture synthesis and silent-interval labeling.

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hush/audio.hpp"
#include "hush/common.hpp"
#include "hush/segmentation.hpp"

namespace hush {

// The seven mixing SNRs, in dB.
inline constexpr double kSnrValues[7] = {-10.0, -7.0, -3.0, 0.0, 3.0, 7.0, 10.0};

// Mean segment energy below this marks a segment silent. Applies to
// peak-normalized clips; energy is the mean of squared amplitudes (exposed as
// a knob because only the threshold value itself is pinned).
inline constexpr double kSilenceEnergyThreshold = 0.08;

struct MixtureSample {
  Waveform clean;    // ground-truth foreground
  Waveform noise;    // scaled noise, same length
  Waveform mixture;  // clean + noise, elementwise
  double snr_db = 0.0;
  std::string clean_id;
  std::string noise_id;
};

// Scales `noise` so that 10*log10(P_clean / P_noise) == snr_db, then adds.
inline MixtureSample mix_at_snr(const Waveform& clean, const Waveform& noise,
                                double snr_db) {
  require(clean.size() == noise.size(), "mix_at_snr: length mismatch");
  require(clean.sample_rate == noise.sample_rate, "mix_at_snr: sample rate mismatch");
  const double p_clean = mean_power(clean);
  const double p_noise = mean_power(noise);
  if (p_clean <= 0.0) throw ArgumentError("mix_at_snr: clean signal has zero power");
  if (p_noise <= 0.0) throw ArgumentError("mix_at_snr: noise signal has zero power");

  const double target_noise_power = p_clean * std::pow(10.0, -snr_db / 10.0);
  const double scale = std::sqrt(target_noise_power / p_noise);

  MixtureSample s;
  s.clean = clean;
  s.noise = noise;
  for (double& v : s.noise.samples) v *= scale;
  s.mixture = s.clean;
  for (std::int64_t i = 0; i < s.mixture.size(); ++i)
    s.mixture.samples[i] = s.clean.samples[i] + s.noise.samples[i];
  s.snr_db = snr_db;
  return s;
}

// Labels each 1/30-s segment of a peak-normalized clean clip: silent iff the
// mean squared amplitude over the segment is below `threshold`. Output is in
// mask polarity (silent = 1).
inline SegmentLabels label_silence(const Waveform& clean,
                                   double threshold = kSilenceEnergyThreshold) {
  SegmentLabels out;
  const std::int64_t segs = segment_count(clean.size(), clean.sample_rate);
  out.labels.resize(segs, 0);
  for (std::int64_t i = 0; i < segs; ++i) {
    const std::int64_t lo = segment_boundary(i, clean.sample_rate);
    const std::int64_t hi =
        std::min<std::int64_t>(clean.size(), segment_boundary(i + 1, clean.sample_rate));
    double acc = 0.0;
    std::int64_t n = 0;
    for (std::int64_t j = lo; j < hi; ++j, ++n) acc += clean.samples[j] * clean.samples[j];
    const double energy = n > 0 ? acc / static_cast<double>(n) : 0.0;
    out.labels[i] = energy < threshold ? 1 : 0;
  }
  return out;
}

// Tiles a noise clip up to at least n samples, then crops at `offset`.
inline Waveform tile_crop(const Waveform& noise, std::int64_t n, std::int64_t offset = 0) {
  require(noise.size() > 0, "tile_crop: empty noise");
  Waveform out;
  out.sample_rate = noise.sample_rate;
  out.samples.resize(n);
  for (std::int64_t i = 0; i < n; ++i)
    out.samples[i] = noise.samples[(offset + i) % noise.size()];
  return out;
}

// ---------------------------------------------------------------------------
// Dataset manifest: JSON-lines, one record per line, paths relative to the
// dataset root.
// ---------------------------------------------------------------------------

struct ManifestRecord {
  std::string mixture;  // path to the mixture wav
  std::string clean;
  std::string noise;
  std::string labels;  // path to the label json
  double snr_db = 0.0;
  std::string split;  // "train" | "test"
  std::string clean_id;
  std::string noise_id;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  std::vector<const ManifestRecord*> split(const std::string& which) const {
    std::vector<const ManifestRecord*> out;
    for (const auto& r : records)
      if (r.split == which) out.push_back(&r);
    return out;
  }
};

inline nlohmann::json record_to_json(const ManifestRecord& r) {
  return nlohmann::json{{"mixture", r.mixture}, {"clean", r.clean},
                        {"noise", r.noise},     {"labels", r.labels},
                        {"snr_db", r.snr_db},   {"split", r.split},
                        {"clean_id", r.clean_id}, {"noise_id", r.noise_id}};
}

inline ManifestRecord record_from_json(const nlohmann::json& j) {
  ManifestRecord r;
  r.mixture = j.at("mixture").get<std::string>();
  r.clean = j.at("clean").get<std::string>();
  r.noise = j.at("noise").get<std::string>();
  r.labels = j.at("labels").get<std::string>();
  r.snr_db = j.at("snr_db").get<double>();
  r.split = j.at("split").get<std::string>();
  r.clean_id = j.at("clean_id").get<std::string>();
  r.noise_id = j.at("noise_id").get<std::string>();
  return r;
}

inline void save_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("save_manifest: cannot open " + path);
  for (const auto& r : m.records) os << record_to_json(r).dump() << '\n';
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_manifest: cannot open " + path);
  DatasetManifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("load_manifest: bad record in " + path);
    m.records.push_back(record_from_json(j));
  }
  return m;
}

inline void save_labels(const std::string& path, const SegmentLabels& labels) {
  nlohmann::json j;
  j["polarity"] = "silent=1";
  j["segment_s"] = 1.0 / kSegmentsPerSecond;
  j["labels"] = std::vector<int>(labels.labels.begin(), labels.labels.end());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("save_labels: cannot open " + path);
  os << j.dump() << '\n';
}

inline SegmentLabels load_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_labels: cannot open " + path);
  nlohmann::json j;
  is >> j;
  SegmentLabels out;
  for (int v : j.at("labels").get<std::vector<int>>())
    out.labels.push_back(static_cast<std::uint8_t>(v));
  return out;
}

// ---------------------------------------------------------------------------
// Manifest building: source-level train/test separation, one uniformly random
// SNR from the seven values per record. Deterministic given the seed.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> list_wavs(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav")
      files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .wav files in " + dir);
  return files;
}

}  // namespace detail

// Plans records without synthesizing audio: pairs every clean source with a
// noise source and SNR. Clean sources are partitioned into train/test by
// `split_ratio`; noise sources are partitioned with the same ratio so the two
// splits share neither clean nor noise sources.
inline DatasetManifest build_manifest(const std::string& clean_dir,
                                      const std::string& noise_dir,
                                      double split_ratio, std::uint64_t seed) {
  require(split_ratio > 0.0 && split_ratio < 1.0, "build_manifest: ratio must be in (0,1)");
  const auto clean_files = detail::list_wavs(clean_dir);
  const auto noise_files = detail::list_wavs(noise_dir);

  Rng rng(seed);
  auto clean_order = clean_files;
  auto noise_order = noise_files;
  std::shuffle(clean_order.begin(), clean_order.end(), rng);
  std::shuffle(noise_order.begin(), noise_order.end(), rng);

  const auto n_clean_train = static_cast<std::size_t>(
      std::llround(split_ratio * static_cast<double>(clean_order.size())));
  const auto n_noise_train = std::min(
      noise_order.size() - 1,
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                   split_ratio * static_cast<double>(noise_order.size())))));
  require(n_clean_train > 0 && n_clean_train < clean_order.size(),
          "build_manifest: split leaves an empty clean partition");

  std::uniform_int_distribution<int> snr_pick(0, 6);
  DatasetManifest m;
  for (std::size_t i = 0; i < clean_order.size(); ++i) {
    const bool train = i < n_clean_train;
    // noise drawn only from the same split's noise sources
    const std::size_t lo = train ? 0 : n_noise_train;
    const std::size_t hi = train ? n_noise_train : noise_order.size();
    std::uniform_int_distribution<std::size_t> noise_pick(lo, hi - 1);
    ManifestRecord r;
    r.clean_id = clean_order[i];
    r.noise_id = noise_order[noise_pick(rng)];
    r.snr_db = kSnrValues[snr_pick(rng)];
    r.split = train ? "train" : "test";
    r.clean = "clean/" + r.clean_id;
    r.noise = "noise/" + r.noise_id;
    m.records.push_back(std::move(r));
  }
  return m;
}

}  // namespace hush
