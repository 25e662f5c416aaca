// stft.hpp — STFT/iSTFT between waveforms and complex spectrograms.

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

#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hush/audio.hpp"
#include "hush/common.hpp"
#include "hush/fft.hpp"
#include "hush/tensor.hpp"

namespace hush {

// Analysis parameters. The defaults are the canonical pipeline configuration:
// FFT size 510 (256 frequency bins), 28 ms Hann window, 11 ms hop at 16 kHz.
// Framing convention: no centering; frame t covers samples
// [t*hop, t*hop + win_len). A signal shorter than one window is zero-padded
// on the right to a single window.
struct StftConfig {
  int n_fft = 510;
  int win_len = 448;
  int hop = 176;
  int sample_rate = 16000;

  int bins() const { return n_fft / 2 + 1; }

  std::int64_t frames_for(std::int64_t n_samples) const {
    if (n_samples <= 0) return 0;
    if (n_samples <= win_len) return 1;
    return 1 + (n_samples - win_len) / hop;
  }

  bool operator==(const StftConfig&) const = default;
};

// Frame count of a 2-second clip under the framing convention above.
// 1 + floor((32000 - 448)/176) = 180. Used as a fixed constant everywhere a
// 2-second training resolution is assumed.
inline constexpr int kFramesPerTwoSeconds = 180;

// Periodic Hann window.
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  return w;
}

// Complex time-frequency array stored as two real channels.
// Layout: data[channel, frame, bin] with channel 0 = real, 1 = imaginary.
struct Spectrogram {
  Tensor data;  // shape [2, T, F]
  StftConfig cfg;

  std::int64_t frames() const { return data.rank() == 3 ? data.dim(1) : 0; }
  std::int64_t bins() const { return data.rank() == 3 ? data.dim(2) : 0; }

  std::complex<double> at(std::int64_t bin, std::int64_t frame) const {
    return {data.at(0, frame, bin), data.at(1, frame, bin)};
  }
  void set(std::int64_t bin, std::int64_t frame, std::complex<double> v) {
    data.at(0, frame, bin) = v.real();
    data.at(1, frame, bin) = v.imag();
  }

  double energy() const {
    double acc = 0.0;
    for (double v : data.vec()) acc += v * v;
    return acc;
  }

  static Spectrogram zeros(std::int64_t frames, const StftConfig& cfg) {
    Spectrogram s;
    s.cfg = cfg;
    s.data = Tensor({2, frames, cfg.bins()});
    return s;
  }
};

inline Spectrogram stft(const Waveform& w, const StftConfig& cfg = {}) {
  if (w.samples.empty()) throw ArgumentError("stft: empty waveform");
  if (w.sample_rate != cfg.sample_rate) throw ArgumentError("stft: sample rate mismatch");

  const std::int64_t frames = cfg.frames_for(w.size());
  const int F = cfg.bins();
  Spectrogram s = Spectrogram::zeros(frames, cfg);
  const std::vector<double> win = hann_window(cfg.win_len);
  std::vector<double> buf(cfg.n_fft);
  for (std::int64_t t = 0; t < frames; ++t) {
    const std::int64_t off = t * cfg.hop;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int i = 0; i < cfg.win_len; ++i) {
      const std::int64_t idx = off + i;
      if (idx < w.size()) buf[i] = w.samples[idx] * win[i];
    }
    std::vector<fft::cd> spec = fft::rdft(buf);
    for (int f = 0; f < F; ++f) {
      s.data.at(0, t, f) = spec[f].real();
      s.data.at(1, t, f) = spec[f].imag();
    }
  }
  return s;
}

// Weighted overlap-add inverse. Exact (to rounding) wherever the window-square
// sum is nonzero; the hop here is not a divisor of the window length, so plain
// overlap-add would not reconstruct.
inline Waveform istft(const Spectrogram& s, const StftConfig& cfg, std::int64_t length) {
  if (s.cfg.n_fft != cfg.n_fft || s.bins() != cfg.bins())
    throw ArgumentError("istft: spectrogram/config mismatch");
  if (length < 0) throw ArgumentError("istft: negative length");

  const std::int64_t frames = s.frames();
  const std::vector<double> win = hann_window(cfg.win_len);
  const std::int64_t cover = frames > 0 ? (frames - 1) * cfg.hop + cfg.win_len : 0;

  std::vector<double> acc(cover, 0.0), den(cover, 0.0);
  std::vector<fft::cd> spec(cfg.bins());
  for (std::int64_t t = 0; t < frames; ++t) {
    for (int f = 0; f < cfg.bins(); ++f)
      spec[f] = {s.data.at(0, t, f), s.data.at(1, t, f)};
    std::vector<double> time = fft::irdft(spec, cfg.n_fft);
    const std::int64_t off = t * cfg.hop;
    for (int i = 0; i < cfg.win_len; ++i) {
      acc[off + i] += win[i] * time[i];
      den[off + i] += win[i] * win[i];
    }
  }
  Waveform out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(length, 0.0);
  const std::int64_t n = std::min(length, cover);
  for (std::int64_t i = 0; i < n; ++i)
    out.samples[i] = den[i] > 1e-12 ? acc[i] / den[i] : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Fixture serialization: one JSON header line (shape + config), then the raw
// samples as little-endian float64.
// ---------------------------------------------------------------------------

inline void save_spectrogram(const std::string& path, const Spectrogram& s) {
  nlohmann::json hdr;
  hdr["shape"] = s.data.shape();
  hdr["n_fft"] = s.cfg.n_fft;
  hdr["win_len"] = s.cfg.win_len;
  hdr["hop"] = s.cfg.hop;
  hdr["sample_rate"] = s.cfg.sample_rate;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save_spectrogram: cannot open " + path);
  os << hdr.dump() << '\n';
  os.write(reinterpret_cast<const char*>(s.data.data()),
           static_cast<std::streamsize>(s.data.numel() * sizeof(double)));
  if (!os) throw IoError("save_spectrogram: short write to " + path);
}

inline Spectrogram load_spectrogram(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_spectrogram: cannot open " + path);
  std::string line;
  std::getline(is, line);
  nlohmann::json hdr = nlohmann::json::parse(line, nullptr, false);
  if (hdr.is_discarded()) throw FormatError("load_spectrogram: bad header in " + path);
  Spectrogram s;
  s.cfg.n_fft = hdr.at("n_fft").get<int>();
  s.cfg.win_len = hdr.at("win_len").get<int>();
  s.cfg.hop = hdr.at("hop").get<int>();
  s.cfg.sample_rate = hdr.at("sample_rate").get<int>();
  std::vector<std::int64_t> shape = hdr.at("shape").get<std::vector<std::int64_t>>();
  s.data = Tensor(shape);
  is.read(reinterpret_cast<char*>(s.data.data()),
          static_cast<std::streamsize>(s.data.numel() * sizeof(double)));
  if (!is) throw FormatError("load_spectrogram: truncated data in " + path);
  return s;
}

}  // namespace hush
