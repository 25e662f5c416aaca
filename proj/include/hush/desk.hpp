// desk.hpp — the in-repo toy preset: synthetic clean/noise sources sized so
// the full training and evaluation loop runs on one CPU core.

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

#include <filesystem>
#include <string>
#include <vector>

#include "hush/audio.hpp"
#include "hush/datagen.hpp"
#include "hush/models.hpp"
#include "hush/training.hpp"

namespace hush::desk {

inline constexpr double kClipSeconds = 1.0;
inline constexpr int kCleanClips = 100;
inline constexpr const char* kCafeFixture = "data/fixtures/cafe.wav";

// Scaled-down widths; topology (layer counts, kernels, dilations, strides)
// is the full-scale one.
inline ModelSpecs model_specs() {
  ModelSpecs s;
  s.sid.conv_filters = 6;
  s.sid.conv_out = 2;
  s.sid.lstm_hidden = 16;
  s.sid.fc_hidden = 16;
  s.est.base_filters = 6;
  s.rem.filters = 6;
  s.rem.enc_out = 2;
  s.rem.lstm_hidden = 24;
  s.rem.fc_hidden = 48;
  return s;
}

inline TrainingConfig training_config(TrainPhase phase, std::uint64_t seed) {
  TrainingConfig cfg;
  cfg.phase = phase;
  cfg.seed = seed;
  cfg.batch_size = 10;
  switch (phase) {
    case TrainPhase::Sid: cfg.epochs = 25; break;
    case TrainPhase::DenoiserGt: cfg.epochs = 50; break;
    case TrainPhase::Finetune: cfg.epochs = 10; break;
    case TrainPhase::EndToEnd: cfg.epochs = 40; break;
    case TrainPhase::Joint: cfg.epochs = 40; break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Clean clips: harmonic tone bursts separated by exact-zero pauses, with all
// run boundaries on the 1/30-s segment grid.
// ---------------------------------------------------------------------------

inline Waveform make_clean_clip(Rng& rng, double seconds = kClipSeconds, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::int64_t>(seconds * rate);
  w.samples.assign(n, 0.0);
  const std::int64_t segs = segment_count(n, rate);

  std::uniform_int_distribution<int> silent_len(2, 5), voiced_len(3, 7);
  std::uniform_real_distribution<double> f0_pick(110.0, 280.0);
  std::uniform_real_distribution<double> amp2(0.2, 0.5), amp3(0.05, 0.2);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_int_distribution<int> start_voiced(0, 1);

  bool voiced = start_voiced(rng) == 1;
  std::int64_t seg = 0;
  int voiced_runs = 0, silent_runs = 0;
  while (seg < segs) {
    std::int64_t run = voiced ? voiced_len(rng) : silent_len(rng);
    // force at least one run of each kind per clip
    if (seg + run >= segs) {
      if (voiced_runs == 0) voiced = true;
      if (silent_runs == 0 && voiced_runs > 0) voiced = false;
      run = segs - seg;
    }
    if (voiced) {
      ++voiced_runs;
      const double f0 = f0_pick(rng);
      const double a2 = amp2(rng), a3 = amp3(rng);
      const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
      const std::int64_t lo = segment_boundary(seg, rate);
      const std::int64_t hi = std::min<std::int64_t>(n, segment_boundary(seg + run, rate));
      const double ramp = 0.005 * rate;  // 5 ms onset/offset inside the run
      for (std::int64_t i = lo; i < hi; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double env = std::min({1.0, (i - lo + 1) / ramp, (hi - i) / ramp});
        w.samples[i] = 0.85 * env *
                       (std::sin(2.0 * M_PI * f0 * t + p1) +
                        a2 * std::sin(2.0 * M_PI * 2.0 * f0 * t + p2) +
                        a3 * std::sin(2.0 * M_PI * 3.0 * f0 * t + p3));
      }
    } else {
      ++silent_runs;
    }
    seg += run;
    voiced = !voiced;
  }
  return normalize_peak(w);
}

// ---------------------------------------------------------------------------
// Noise sources. Four families; every instance is randomized so the noise
// cannot be predicted without reading it off the input.
// ---------------------------------------------------------------------------

enum class NoiseKind { White, Chirp, AmTone, Cafe };

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::White: return "white";
    case NoiseKind::Chirp: return "chirp";
    case NoiseKind::AmTone: return "am";
    case NoiseKind::Cafe: return "cafe";
  }
  return "?";
}

// Procedural cafe-style ambience: pink-ish bed plus sparse clinks and a hum.
// Used once to render the committed fixture; the preset then crops from the
// fixture file.
inline Waveform render_cafe_ambience(Rng& rng, double seconds, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::int64_t>(seconds * rate);
  w.samples.assign(n, 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double lp1 = 0.0, lp2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double white = gauss(rng);
    lp1 = 0.995 * lp1 + 0.05 * white;   // low rumble
    lp2 = 0.90 * lp2 + 0.20 * white;    // mid bed
    const double t = static_cast<double>(i) / rate;
    const double hum = 0.04 * std::sin(2.0 * M_PI * 120.0 * t);
    w.samples[i] = 1.2 * lp1 + 0.5 * lp2 + 0.05 * white + hum;
  }
  // sparse clinks: short decaying high tones
  std::uniform_real_distribution<double> when(0.0, seconds);
  std::uniform_real_distribution<double> clink_f(1800.0, 4200.0);
  const int n_clinks = static_cast<int>(seconds * 2.0);
  for (int c = 0; c < n_clinks; ++c) {
    const auto start = static_cast<std::int64_t>(when(rng) * rate);
    const double f = clink_f(rng);
    for (std::int64_t i = start; i < std::min<std::int64_t>(n, start + rate / 20); ++i) {
      const double dt = static_cast<double>(i - start) / rate;
      w.samples[i] += 0.4 * std::exp(-dt * 80.0) * std::sin(2.0 * M_PI * f * dt);
    }
  }
  return normalize_peak(w);
}

inline Waveform make_noise_source(NoiseKind kind, Rng& rng, double seconds,
                                  const std::string& cafe_fixture = kCafeFixture,
                                  int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::int64_t>(seconds * rate);
  w.samples.assign(n, 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (kind) {
    case NoiseKind::White: {
      std::normal_distribution<double> gauss(0.0, 0.5);
      for (auto& s : w.samples) s = gauss(rng);
      break;
    }
    case NoiseKind::Chirp: {
      const double f0 = 200.0 + 2800.0 * unit(rng);
      const double f1 = 400.0 + 5600.0 * unit(rng);
      const double p = 2.0 * M_PI * unit(rng);
      for (std::int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double tt = t / seconds;
        w.samples[i] = 0.5 * std::sin(2.0 * M_PI * (f0 * t + 0.5 * (f1 - f0) * tt * t) + p);
      }
      break;
    }
    case NoiseKind::AmTone: {
      const double fc = 300.0 + 4700.0 * unit(rng);
      const double fm = 2.0 + 6.0 * unit(rng);
      const double p = 2.0 * M_PI * unit(rng), pm = 2.0 * M_PI * unit(rng);
      for (std::int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        w.samples[i] = 0.5 * (0.55 + 0.45 * std::sin(2.0 * M_PI * fm * t + pm)) *
                       std::sin(2.0 * M_PI * fc * t + p);
      }
      break;
    }
    case NoiseKind::Cafe: {
      if (std::filesystem::exists(cafe_fixture)) {
        Waveform fixture = load_wav(cafe_fixture);
        std::uniform_int_distribution<std::int64_t> offset(0, std::max<std::int64_t>(1, fixture.size() - 1));
        w = tile_crop(fixture, n, offset(rng));
        const double gain = 0.5 + 0.5 * unit(rng);
        for (auto& s : w.samples) s *= gain;
      } else {
        w = render_cafe_ambience(rng, seconds, rate);
      }
      break;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Full desk dataset on disk: clean/, noise/, mix/, labels/, manifest.jsonl
// ---------------------------------------------------------------------------

inline DatasetManifest synthesize_dataset(const std::string& out_dir, std::uint64_t seed,
                                          int n_clean = kCleanClips,
                                          double clip_seconds = kClipSeconds,
                                          const std::string& cafe_fixture = kCafeFixture) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "clean");
  fs::create_directories(fs::path(out_dir) / "noise");
  fs::create_directories(fs::path(out_dir) / "mix");
  fs::create_directories(fs::path(out_dir) / "labels");

  Rng rng(seed);
  for (int i = 0; i < n_clean; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "clean/c%03d.wav", i);
    save_wav(out_dir + "/" + name, make_clean_clip(rng, clip_seconds), WavFormat::Float32);
  }
  const NoiseKind kinds[4] = {NoiseKind::White, NoiseKind::Chirp, NoiseKind::AmTone,
                              NoiseKind::Cafe};
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 3; ++j) {
      char name[32];
      std::snprintf(name, sizeof(name), "noise/%s_%d.wav", noise_kind_name(kinds[k]), j);
      save_wav(out_dir + "/" + name,
               make_noise_source(kinds[k], rng, 3.0, cafe_fixture), WavFormat::Float32);
    }

  DatasetManifest manifest =
      build_manifest(out_dir + "/clean", out_dir + "/noise", 0.8, seed);
  // synthesize one mixture per record
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    auto& rec = manifest.records[i];
    Waveform clean = normalize_peak(load_wav(out_dir + "/" + rec.clean));
    Waveform noise_src = load_wav(out_dir + "/" + rec.noise);
    std::uniform_int_distribution<std::int64_t> offset(0, noise_src.size() - 1);
    Waveform noise = tile_crop(noise_src, clean.size(), offset(rng));
    MixtureSample mix = mix_at_snr(clean, noise, rec.snr_db);

    char base[32];
    std::snprintf(base, sizeof(base), "%04zu", i);
    rec.mixture = std::string("mix/") + base + ".wav";
    rec.labels = std::string("labels/") + base + ".json";
    const std::string noise_path = std::string("mix/") + base + "_noise.wav";
    const std::string clean_path = std::string("mix/") + base + "_clean.wav";
    save_wav(out_dir + "/" + rec.mixture, mix.mixture, WavFormat::Float32);
    save_wav(out_dir + "/" + noise_path, mix.noise, WavFormat::Float32);
    save_wav(out_dir + "/" + clean_path, mix.clean, WavFormat::Float32);
    rec.noise = noise_path;
    rec.clean = clean_path;
    save_labels(out_dir + "/" + rec.labels, label_silence(clean));
  }
  save_manifest(out_dir + "/manifest.jsonl", manifest);
  return manifest;
}

}  // namespace hush::desk
