// audio.hpp — waveform type, WAV file I/O, resampling, clip utilities.

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
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "hush/common.hpp"

namespace hush {

// Mono audio signal. Amplitudes are dimensionless with nominal range [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
  double duration_s() const { return static_cast<double>(size()) / sample_rate; }
};

struct ClipSpec {
  double duration_s = 2.0;
  int sample_rate = 16000;

  std::int64_t samples_per_clip() const {
    double n = duration_s * sample_rate;
    auto ni = static_cast<std::int64_t>(std::llround(n));
    require(ni > 0 && std::abs(n - static_cast<double>(ni)) < 1e-9,
            "ClipSpec: duration*rate must be a positive integer sample count");
    return ni;
  }
};

inline double peak_amplitude(const Waveform& w) {
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  return peak;
}

inline double mean_power(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc / static_cast<double>(w.samples.size());
}

// ---------------------------------------------------------------------------
// WAV (RIFF) I/O. Reads PCM16, PCM24, PCM32 and IEEE float32/64; any channel
// count is averaged down to mono. Writes PCM16 or float32.
// ---------------------------------------------------------------------------

enum class WavFormat { Pcm16, Float32 };

namespace wav_detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}
inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace wav_detail

inline Waveform load_wav(const std::string& path) {
  using namespace wav_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("load_wav: not a RIFF/WAVE file: " + path);

  int channels = 0, bits = 0, rate = 0, audio_format = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    std::uint32_t len = read_u32(bytes.data() + pos + 4);
    if (pos + 8 + len > bytes.size()) len = static_cast<std::uint32_t>(bytes.size() - pos - 8);
    if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
      audio_format = read_u16(bytes.data() + pos + 8);
      channels = read_u16(bytes.data() + pos + 10);
      rate = static_cast<int>(read_u32(bytes.data() + pos + 12));
      bits = read_u16(bytes.data() + pos + 22);
      if (audio_format == 0xFFFE && len >= 40)  // WAVE_FORMAT_EXTENSIBLE
        audio_format = read_u16(bytes.data() + pos + 32);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (channels <= 0 || rate <= 0 || data == nullptr)
    throw FormatError("load_wav: missing fmt/data chunk: " + path);

  const int bytes_per_sample = bits / 8;
  if (bytes_per_sample <= 0) throw FormatError("load_wav: bad bit depth in " + path);
  const std::size_t frames = data_len / (static_cast<std::size_t>(bytes_per_sample) * channels);

  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * bytes_per_sample;
      double v = 0.0;
      if (audio_format == 1 && bits == 16) {
        std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        v = static_cast<double>(s) / 32768.0;
      } else if (audio_format == 1 && bits == 24) {
        std::int32_t s = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (s & 0x800000) s |= ~0xFFFFFF;
        v = static_cast<double>(s) / 8388608.0;
      } else if (audio_format == 1 && bits == 32) {
        std::int32_t s;
        std::memcpy(&s, p, 4);
        v = static_cast<double>(s) / 2147483648.0;
      } else if (audio_format == 3 && bits == 32) {
        float f;
        std::memcpy(&f, p, 4);
        v = static_cast<double>(f);
      } else if (audio_format == 3 && bits == 64) {
        double d;
        std::memcpy(&d, p, 8);
        v = d;
      } else {
        throw FormatError("load_wav: unsupported encoding (format " +
                          std::to_string(audio_format) + ", " + std::to_string(bits) +
                          " bit) in " + path);
      }
      acc += v;
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

inline void save_wav(const std::string& path, const Waveform& w,
                     WavFormat fmt = WavFormat::Pcm16) {
  using namespace wav_detail;
  const int bits = fmt == WavFormat::Pcm16 ? 16 : 32;
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, fmt == WavFormat::Pcm16 ? 1 : 3);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate * (bits / 8)));
  put_u16(out, static_cast<std::uint16_t>(bits / 8));
  put_u16(out, static_cast<std::uint16_t>(bits));
  out += "data";
  put_u32(out, data_len);
  if (fmt == WavFormat::Pcm16) {
    for (double s : w.samples) {
      // scale by 32768 and clamp so decode (/32768) stays within one step
      long q = std::lrint(std::clamp(s, -1.0, 1.0) * 32768.0);
      q = std::clamp<long>(q, -32768, 32767);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  } else {
    for (double s : w.samples) {
      float f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save_wav: cannot open " + path + " for writing");
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("save_wav: short write to " + path);
}

// ---------------------------------------------------------------------------
// Resampling: rational-ratio polyphase with a Kaiser-windowed sinc kernel.
// ---------------------------------------------------------------------------

namespace resample_detail {

inline double bessel_i0(double x) {
  // power series; converges quickly for the beta values used here
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

inline double kaiser(double t, double half_width, double beta) {
  if (std::abs(t) > half_width) return 0.0;
  double r = t / half_width;
  return bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / bessel_i0(beta);
}

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace resample_detail

inline Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw ArgumentError("resample: target_rate must be positive");
  if (w.sample_rate == target_rate) return w;
  Waveform out;
  out.sample_rate = target_rate;
  if (w.samples.empty()) return out;

  const std::int64_t g = std::gcd<std::int64_t>(w.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;    // L
  const std::int64_t down = w.sample_rate / g;  // M

  const double cutoff = std::min(1.0, static_cast<double>(up) / down);
  const double beta = 9.0;
  const double base_half_width = 32.0;
  const double half_width = base_half_width / cutoff;  // in input samples

  const std::int64_t n_in = w.size();
  const std::int64_t n_out = std::llround(static_cast<double>(n_in) * target_rate /
                                          w.sample_rate);
  out.samples.resize(n_out, 0.0);
  for (std::int64_t n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) * down / up;  // input-time position
    const auto k0 = static_cast<std::int64_t>(std::ceil(t - half_width));
    const auto k1 = static_cast<std::int64_t>(std::floor(t + half_width));
    double acc = 0.0;
    for (std::int64_t k = std::max<std::int64_t>(0, k0); k <= std::min(n_in - 1, k1); ++k) {
      const double d = t - static_cast<double>(k);
      acc += w.samples[k] * cutoff * resample_detail::sinc(cutoff * d) *
             resample_detail::kaiser(d, half_width, beta);
    }
    out.samples[n] = acc;
  }
  return out;
}

// Scales so the largest |sample| is exactly 1. All-zero input is returned as is.
inline Waveform normalize_peak(const Waveform& w) {
  require(!w.samples.empty(), "normalize_peak: empty waveform");
  double peak = peak_amplitude(w);
  if (peak == 0.0) return w;
  Waveform out = w;
  for (double& s : out.samples) s /= peak;
  return out;
}

// Contiguous non-overlapping clips; the trailing remainder is discarded.
inline std::vector<Waveform> split_clips(const Waveform& w, const ClipSpec& spec) {
  if (w.sample_rate != spec.sample_rate)
    throw ArgumentError("split_clips: sample rate mismatch");
  const std::int64_t n = spec.samples_per_clip();
  std::vector<Waveform> clips;
  for (std::int64_t start = 0; start + n <= w.size(); start += n) {
    Waveform c;
    c.sample_rate = w.sample_rate;
    c.samples.assign(w.samples.begin() + start, w.samples.begin() + start + n);
    clips.push_back(std::move(c));
  }
  return clips;
}

}  // namespace hush
