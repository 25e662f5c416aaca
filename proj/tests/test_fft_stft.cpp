// test_fft_stft.cpp

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

#include <complex>
#include <random>

#include "hush/fft.hpp"
#include "hush/stft.hpp"

using namespace hush;

namespace {

// Independent O(n^2) DFT oracle.
std::vector<fft::cd> naive_dft(const std::vector<fft::cd>& x) {
  const std::size_t n = x.size();
  std::vector<fft::cd> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    fft::cd acc(0, 0);
    for (std::size_t t = 0; t < n; ++t) {
      double ang = -2.0 * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * fft::cd(std::cos(ang), std::sin(ang));
    }
    y[k] = acc;
  }
  return y;
}

Waveform random_clip(double seconds, std::uint64_t seed, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& s : w.samples) s = dist(rng);
  return w;
}

// Relative L2 reconstruction error over the fully-overlapped interior.
double roundtrip_error(const Waveform& w, const StftConfig& cfg) {
  Spectrogram s = stft(w, cfg);
  Waveform r = istft(s, cfg, w.size());
  const std::int64_t cover = (s.frames() - 1) * cfg.hop + cfg.win_len;
  const std::int64_t lo = cfg.hop;
  const std::int64_t hi = std::min<std::int64_t>(w.size(), cover) - cfg.hop;
  double num = 0.0, den = 0.0;
  for (std::int64_t i = lo; i < hi; ++i) {
    const double d = r.samples[i] - w.samples[i];
    num += d * d;
    den += w.samples[i] * w.samples[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("fft matches naive DFT for mixed-radix sizes") {
  Rng rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t n : {2u, 3u, 5u, 8u, 17u, 30u, 255u, 510u}) {
    std::vector<fft::cd> x(n);
    for (auto& v : x) v = {dist(rng), dist(rng)};
    auto got = fft::fft(x);
    auto want = naive_dft(x);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
    CAPTURE(n);
    REQUIRE(worst < 1e-9);
  }
}

TEST_CASE("ifft inverts fft") {
  Rng rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<fft::cd> x(510);
  for (auto& v : x) v = {dist(rng), dist(rng)};
  auto y = fft::ifft(fft::fft(x));
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(y[i] - x[i]) < 1e-12);
}

TEST_CASE("rdft/irdft round trip on real signals") {
  Rng rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(510);
  for (auto& v : x) v = dist(rng);
  auto bins = fft::rdft(x);
  REQUIRE(bins.size() == 256);
  auto back = fft::irdft(bins, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(back[i] == Catch::Approx(x[i]).margin(1e-12));
}

TEST_CASE("stft shape for a 2-second clip") {
  StftConfig cfg;
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(32000, 0.0);
  Spectrogram s = stft(w, cfg);
  REQUIRE(s.bins() == 256);
  REQUIRE(s.frames() == kFramesPerTwoSeconds);
  for (double v : s.data.vec()) REQUIRE(v == 0.0);
}

TEST_CASE("stft rejects empty input") {
  REQUIRE_THROWS_AS(stft(Waveform{}, StftConfig{}), ArgumentError);
}

TEST_CASE("1 kHz sine concentrates at bin 32") {
  // bin arithmetic: round(1000 * 510 / 16000) = 32
  StftConfig cfg;
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(32000);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);
  Spectrogram s = stft(w, cfg);
  for (std::int64_t t = 0; t < s.frames(); ++t) {
    int best = 0;
    double best_mag = -1.0;
    for (int f = 0; f < 256; ++f) {
      const double mag = std::abs(s.at(f, t));
      if (mag > best_mag) {
        best_mag = mag;
        best = f;
      }
    }
    REQUIRE(best == 32);
  }
}

TEST_CASE("stft is linear") {
  StftConfig cfg;
  Waveform a = random_clip(0.5, 21), b = random_clip(0.5, 22);
  Waveform sum = a;
  for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] += b.samples[i];
  Spectrogram sa = stft(a, cfg), sb = stft(b, cfg), ss = stft(sum, cfg);
  for (std::int64_t i = 0; i < ss.data.numel(); ++i)
    REQUIRE(ss.data[i] == Catch::Approx(sa.data[i] + sb.data[i]).margin(1e-9));
}

TEST_CASE("istft round trip on white noise") {
  StftConfig cfg;
  REQUIRE(roundtrip_error(random_clip(2.0, 31), cfg) <= 1e-4);
}

TEST_CASE("istft of a zero spectrogram is silence") {
  StftConfig cfg;
  Spectrogram s = Spectrogram::zeros(kFramesPerTwoSeconds, cfg);
  Waveform w = istft(s, cfg, 32000);
  REQUIRE(w.size() == 32000);
  for (double v : w.samples) REQUIRE(v == 0.0);
}

TEST_CASE("istft rejects mismatched config") {
  StftConfig cfg;
  Spectrogram s = Spectrogram::zeros(10, cfg);
  StftConfig other = cfg;
  other.n_fft = 512;
  REQUIRE_THROWS_AS(istft(s, other, 1000), ArgumentError);
}

TEST_CASE("stft is deterministic") {
  StftConfig cfg;
  Waveform w = random_clip(1.0, 77);
  Spectrogram a = stft(w, cfg), b = stft(w, cfg);
  REQUIRE(a.data.vec() == b.data.vec());
}

TEST_CASE("spectrogram energy ratio is pinned") {
  // Window-dependent constant, measured once on this fixed clip and frozen.
  StftConfig cfg;
  Waveform w = random_clip(2.0, 1234);
  Spectrogram s = stft(w, cfg);
  double wav_energy = 0.0;
  for (double v : w.samples) wav_energy += v * v;
  const double ratio = s.energy() / wav_energy;
  const double frozen = 241.703771428474;
  REQUIRE(ratio == Catch::Approx(frozen).epsilon(1e-6));
}

TEST_CASE("spectrogram fixture serialization round trip") {
  StftConfig cfg;
  Waveform w = random_clip(0.25, 5);
  Spectrogram s = stft(w, cfg);
  const std::string path = "/tmp/hush_spec_fixture.bin";
  save_spectrogram(path, s);
  Spectrogram r = load_spectrogram(path);
  REQUIRE(r.cfg == s.cfg);
  REQUIRE(r.data.shape() == s.data.shape());
  REQUIRE(r.data.vec() == s.data.vec());
}
