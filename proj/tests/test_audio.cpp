// test_audio.cpp

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

#include <cstdio>
#include <fstream>

#include "hush/audio.hpp"
#include "hush/fft.hpp"

using namespace hush;

namespace {

Waveform sine(double freq, double seconds, int rate, double amp = 1.0) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq * i / rate);
  return w;
}

// Hand-crafted interleaved stereo PCM16 WAV.
void write_stereo_wav(const std::string& path, const std::vector<std::int16_t>& left,
                      const std::vector<std::int16_t>& right, int rate) {
  std::string out;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
  };
  const auto data_len = static_cast<std::uint32_t>(left.size() * 4);
  out += "RIFF";
  u32(36 + data_len);
  out += "WAVEfmt ";
  u32(16);
  u16(1);
  u16(2);
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * 4));
  u16(4);
  u16(16);
  out += "data";
  u32(data_len);
  for (std::size_t i = 0; i < left.size(); ++i) {
    u16(static_cast<std::uint16_t>(left[i]));
    u16(static_cast<std::uint16_t>(right[i]));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

int dominant_bin(const Waveform& w, std::size_t n_fft) {
  std::vector<double> x(w.samples.begin(), w.samples.begin() + n_fft);
  auto bins = fft::rdft(x);
  int best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 0; k < bins.size(); ++k)
    if (std::abs(bins[k]) > best_mag) {
      best_mag = std::abs(bins[k]);
      best = static_cast<int>(k);
    }
  return best;
}

}  // namespace

TEST_CASE("wav round trip: PCM16 within one quantization step") {
  Waveform w = sine(440.0, 2.0, 16000, 0.7);
  REQUIRE(w.size() == 32000);
  const std::string path = "/tmp/hush_test_rt.wav";
  save_wav(path, w, WavFormat::Pcm16);
  Waveform r = load_wav(path);
  REQUIRE(r.sample_rate == 16000);
  REQUIRE(r.size() == 32000);
  for (std::int64_t i = 0; i < r.size(); ++i)
    REQUIRE(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
}

TEST_CASE("wav round trip: float32 is near-lossless") {
  Waveform w = sine(317.0, 0.5, 16000, 0.3);
  const std::string path = "/tmp/hush_test_f32.wav";
  save_wav(path, w, WavFormat::Float32);
  Waveform r = load_wav(path);
  for (std::int64_t i = 0; i < r.size(); ++i)
    REQUIRE(r.samples[i] == Catch::Approx(w.samples[i]).margin(1e-7));
}

TEST_CASE("stereo with opposite channels averages to silence") {
  std::vector<std::int16_t> left(1000), right(1000);
  for (int i = 0; i < 1000; ++i) {
    left[i] = static_cast<std::int16_t>(2000 * std::sin(0.05 * i));
    right[i] = static_cast<std::int16_t>(-left[i]);
  }
  const std::string path = "/tmp/hush_test_stereo.wav";
  write_stereo_wav(path, left, right, 16000);
  Waveform w = load_wav(path);
  REQUIRE(w.size() == 1000);
  for (double s : w.samples) REQUIRE(s == 0.0);
}

TEST_CASE("load_wav rejects missing and corrupt files") {
  REQUIRE_THROWS_AS(load_wav("/tmp/hush_does_not_exist.wav"), IoError);
  const std::string path = "/tmp/hush_test_garbage.wav";
  std::ofstream(path) << "this is not a wav file at all";
  REQUIRE_THROWS_AS(load_wav(path), FormatError);
}

TEST_CASE("resample: identity and empty") {
  Waveform w = sine(100.0, 0.1, 16000);
  Waveform same = resample(w, 16000);
  REQUIRE(same.samples == w.samples);

  Waveform empty;
  empty.sample_rate = 48000;
  Waveform r = resample(empty, 16000);
  REQUIRE(r.samples.empty());
  REQUIRE(r.sample_rate == 16000);

  REQUIRE_THROWS_AS(resample(w, 0), ArgumentError);
  REQUIRE_THROWS_AS(resample(w, -5), ArgumentError);
}

TEST_CASE("resample 48k -> 16k preserves a 1 kHz tone") {
  Waveform w = sine(1000.0, 2.0, 48000);
  Waveform r = resample(w, 16000);
  REQUIRE(r.sample_rate == 16000);
  REQUIRE(std::abs(r.size() - 32000) <= 1);
  // 16384-point FFT at 16 kHz puts 1 kHz exactly at bin 1024
  REQUIRE(dominant_bin(r, 16384) == 1024);
}

TEST_CASE("resample 44.1k fixture has the right length ratio") {
  Waveform w = sine(1000.0, 1.5, 44100);
  Waveform r = resample(w, 16000);
  const double expected = static_cast<double>(w.size()) * 16000.0 / 44100.0;
  REQUIRE(std::abs(r.size() - expected) <= 1.0);
  REQUIRE(dominant_bin(r, 16384) == 1024);
}

TEST_CASE("normalize_peak scales the peak to one") {
  Waveform w;
  w.samples = {0.5, -0.25};
  Waveform n = normalize_peak(w);
  REQUIRE(n.samples[0] == 1.0);
  REQUIRE(n.samples[1] == -0.5);

  w.samples = {-2.0, 1.0};
  n = normalize_peak(w);
  REQUIRE(n.samples[0] == -1.0);
  REQUIRE(n.samples[1] == 0.5);
}

TEST_CASE("normalize_peak keeps silence untouched and is idempotent") {
  Waveform z;
  z.samples.assign(100, 0.0);
  REQUIRE(normalize_peak(z).samples == z.samples);

  Rng rng(3);
  std::uniform_real_distribution<double> dist(-0.8, 0.8);
  Waveform w;
  w.samples.resize(500);
  for (auto& s : w.samples) s = dist(rng);
  Waveform once = normalize_peak(w);
  Waveform twice = normalize_peak(once);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    REQUIRE(twice.samples[i] == Catch::Approx(once.samples[i]).margin(1e-15));
}

TEST_CASE("split_clips discards the trailing remainder") {
  ClipSpec spec;  // 2 s at 16 kHz
  Waveform w = sine(50.0, 5.0, 16000);
  auto clips = split_clips(w, spec);
  REQUIRE(clips.size() == 2);
  for (const auto& c : clips) REQUIRE(c.size() == 32000);

  auto one = split_clips(sine(50.0, 2.0, 16000), spec);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].samples == std::vector<double>(w.samples.begin(), w.samples.begin() + 32000));

  REQUIRE(split_clips(sine(50.0, 1.9, 16000), spec).empty());
}

TEST_CASE("split_clips outputs are contiguous slices") {
  ClipSpec spec{0.5, 16000};
  Waveform w = sine(150.0, 1.8, 16000);
  auto clips = split_clips(w, spec);
  REQUIRE(clips.size() == 3);
  std::size_t off = 0;
  for (const auto& c : clips) {
    for (std::int64_t i = 0; i < c.size(); ++i)
      REQUIRE(c.samples[i] == w.samples[off + i]);
    off += c.samples.size();
  }
}

TEST_CASE("split_clips rejects sample-rate mismatch") {
  ClipSpec spec{2.0, 16000};
  REQUIRE_THROWS_AS(split_clips(sine(50.0, 3.0, 8000), spec), ArgumentError);
}
