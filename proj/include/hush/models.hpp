// models.hpp — silent interval detector D, noise estimator N, noise removal R,
// and the composed denoising pipeline.

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

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "hush/audio.hpp"
#include "hush/layers.hpp"
#include "hush/segmentation.hpp"
#include "hush/stft.hpp"

namespace hush {

// ---------------------------------------------------------------------------
// Network specs. Defaults are the full-scale configurations; widths scale
// down proportionally for CPU-sized runs. Kernel sizes, dilations, strides,
// and layer counts are fixed topology. Dilation/kernel pairs are ordered
// (time, frequency) throughout.
// ---------------------------------------------------------------------------

struct SidNetworkSpec {
  std::int64_t conv_filters = 48;  // layers 1-11
  std::int64_t conv_out = 8;       // layer 12
  std::int64_t lstm_hidden = 100;
  std::int64_t fc_hidden = 100;
  std::int64_t freq_bins = 256;  // per-frame feature width is conv_out * freq_bins

  bool operator==(const SidNetworkSpec&) const = default;
};

struct NoiseEstimatorSpec {
  // encoder filters are {base, 2*base, 2*base}; decoder {4*base ... 2*base,
  // 2*base, base, base, 2}; the full-scale base is 64.
  std::int64_t base_filters = 64;

  bool operator==(const NoiseEstimatorSpec&) const = default;
};

struct NoiseRemovalSpec {
  std::int64_t filters = 96;  // encoder A layers 1-14; encoder B uses half
  std::int64_t enc_out = 8;   // encoder A layer 15; encoder B uses half
  std::int64_t lstm_hidden = 200;
  std::int64_t fc_hidden = 600;
  std::int64_t freq_bins = 256;

  bool operator==(const NoiseRemovalSpec&) const = default;
};

struct ModelSpecs {
  SidNetworkSpec sid;
  NoiseEstimatorSpec est;
  NoiseRemovalSpec rem;
  StftConfig stft_cfg;

  bool operator==(const ModelSpecs&) const = default;
};

// Per-bin complex multiplier with entries in [0, 1] per channel.
// Layout matches Spectrogram: [2, T, F].
struct ComplexRatioMask {
  Tensor data;

  std::int64_t frames() const { return data.dim(1); }
  std::int64_t bins() const { return data.dim(2); }
};

enum class MaskProduct {
  Complex,     // (a+bi)(p+qi), the complex ratio mask construction
  PerChannel,  // real per-channel product; kept as a recorded alternative
};

// ---------------------------------------------------------------------------
// Shared geometry helpers
// ---------------------------------------------------------------------------

// Maps each STFT frame to the 1/30-s segment containing its center sample.
inline std::vector<std::int64_t> frame_segment_map(std::int64_t n_frames,
                                                   std::int64_t n_samples,
                                                   const StftConfig& cfg) {
  const std::int64_t segs = segment_count(n_samples, cfg.sample_rate);
  std::vector<std::int64_t> map(n_frames);
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const std::int64_t center = std::min<std::int64_t>(t * cfg.hop + cfg.win_len / 2,
                                                       std::max<std::int64_t>(0, n_samples - 1));
    map[t] = std::min(segs - 1, segment_of_sample(center, cfg.sample_rate));
  }
  return map;
}

// Spectrogram [2,T,F] -> batch-1 Var [1,2,T,F] (no gradient tracking).
inline nn::Var spec_to_var(const Spectrogram& s) {
  Tensor t = s.data.reshaped({1, 2, s.frames(), s.bins()});
  return nn::Var(std::move(t), false);
}

inline Spectrogram var_to_spec(const Tensor& batch, const StftConfig& cfg,
                               std::int64_t item) {
  const std::int64_t t = batch.dim(2), f = batch.dim(3);
  Spectrogram s = Spectrogram::zeros(t, cfg);
  std::copy_n(batch.data() + item * 2 * t * f, 2 * t * f, s.data.data());
  return s;
}

// ---------------------------------------------------------------------------
// Silent interval detection D
// ---------------------------------------------------------------------------

class SidNet {
 public:
  SidNet(const SidNetworkSpec& spec, Rng& rng) : spec_(spec) {
    // Table-ordered conv stack: {kt, kf, dt, df}
    static constexpr std::array<std::array<int, 4>, 12> kGeom = {{
        {1, 7, 1, 1}, {7, 1, 1, 1}, {5, 5, 1, 1}, {5, 5, 2, 1}, {5, 5, 4, 1},
        {5, 5, 8, 1}, {5, 5, 16, 1}, {5, 5, 32, 1}, {5, 5, 1, 1}, {5, 5, 2, 2},
        {5, 5, 4, 4}, {1, 1, 1, 1},
    }};
    std::int64_t cin = 2;
    for (std::size_t i = 0; i < kGeom.size(); ++i) {
      const std::int64_t cout = i + 1 < kGeom.size() ? spec.conv_filters : spec.conv_out;
      convs_.emplace_back(store_, "conv" + std::to_string(i + 1), cin, cout, kGeom[i][0],
                          kGeom[i][1], 1, 1, kGeom[i][2], kGeom[i][3], rng);
      cin = cout;
    }
    lstm_ = nn::BiLstm(store_, "lstm", spec.conv_out * spec.freq_bins, spec.lstm_hidden, rng);
    fc1_ = nn::Linear(store_, "fc1", 2 * spec.lstm_hidden, spec.fc_hidden, rng);
    fc2_ = nn::Linear(store_, "fc2", spec.fc_hidden, 1, rng);
  }

  // x: [N, 2, T, F] -> segment confidences [N, S]
  nn::Var forward(const nn::Var& x, const std::vector<std::int64_t>& frame_seg,
                  std::int64_t n_segments, bool training) {
    require(x.shape()[3] == spec_.freq_bins, "SidNet: frequency bin mismatch");
    nn::Var h = x;
    for (const auto& c : convs_) h = c.forward(h, training);
    nn::Var seq = nn::to_sequence(h);  // [N, T, C*F]
    const std::int64_t n = seq.shape()[0], t = seq.shape()[1], d = seq.shape()[2];
    nn::Var rnn = lstm_.forward(seq);  // [N, T, 2H]
    nn::Var flat = nn::reshape(rnn, {n * t, 2 * spec_.lstm_hidden});
    nn::Var f1 = nn::relu(fc1_.forward(flat));
    nn::Var conf = nn::sigmoid(fc2_.forward(f1));   // [N*T, 1]
    nn::Var frames = nn::reshape(conf, {n, t});
    return nn::segment_mean(frames, frame_seg, n_segments);
  }

  nn::ParamStore& store() { return store_; }
  const SidNetworkSpec& spec() const { return spec_; }

 private:
  SidNetworkSpec spec_;
  nn::ParamStore store_;
  std::vector<nn::ConvBnRelu> convs_;
  nn::BiLstm lstm_;
  nn::Linear fc1_, fc2_;
};

// ---------------------------------------------------------------------------
// Noise estimation N (spectrogram inpainting)
// ---------------------------------------------------------------------------

class NoiseEstNet {
 public:
  NoiseEstNet(const NoiseEstimatorSpec& spec, Rng& rng) : spec_(spec) {
    const std::int64_t b = spec.base_filters;
    auto encoder = [&](const std::string& prefix, std::vector<nn::ConvBnRelu>& enc) {
      enc.emplace_back(store_, prefix + "1", 2, b, 5, 5, 1, 1, 1, 1, rng);
      enc.emplace_back(store_, prefix + "2", b, 2 * b, 5, 5, 2, 2, 1, 1, rng);
      enc.emplace_back(store_, prefix + "3", 2 * b, 2 * b, 5, 5, 1, 1, 1, 1, rng);
    };
    encoder("enc_x", enc_x_);
    encoder("enc_p", enc_p_);

    const std::int64_t dm = 4 * b;  // decoder trunk width
    dec4_ = nn::ConvBnRelu(store_, "dec4", dm, dm, 3, 3, 2, 2, 1, 1, rng);
    static constexpr std::array<int, 7> kDil = {1, 2, 4, 8, 16, 1, 1};
    for (std::size_t i = 0; i < kDil.size(); ++i)
      trunk_.emplace_back(store_, "dec" + std::to_string(i + 5), dm, dm, 3, 3, 1, 1,
                          kDil[i], kDil[i], rng);
    up12_ = nn::ConvTranspose2d(store_, "dec12.tc", dm, 2 * b, 3, 2, rng);
    bn12_ = nn::BatchNorm2d(store_, "dec12.bn", 2 * b);
    dec13_ = nn::ConvBnRelu(store_, "dec13", 2 * b, 2 * b, 3, 3, 1, 1, 1, 1, rng);
    up14_ = nn::ConvTranspose2d(store_, "dec14.tc", 2 * b, b, 3, 2, rng);
    bn14_ = nn::BatchNorm2d(store_, "dec14.bn", b);
    dec15_ = nn::ConvBnRelu(store_, "dec15", b, b, 3, 3, 1, 1, 1, 1, rng);
    dec16_ = nn::Conv2d(store_, "dec16", b, 2, 3, 3, 1, 1, 1, 1, rng);
  }

  // s_x, s_profile: [N, 2, T, F] -> estimated noise spectrogram [N, 2, T, F]
  nn::Var forward(const nn::Var& s_x, const nn::Var& s_profile, bool training) {
    require(s_x.shape() == s_profile.shape(), "NoiseEstNet: input shape mismatch");
    nn::Var x1 = enc_x_[0].forward(s_x, training);
    nn::Var x2 = enc_x_[1].forward(x1, training);
    nn::Var x3 = enc_x_[2].forward(x2, training);
    nn::Var p1 = enc_p_[0].forward(s_profile, training);
    nn::Var p2 = enc_p_[1].forward(p1, training);
    nn::Var p3 = enc_p_[2].forward(p2, training);

    nn::Var h = dec4_.forward(nn::concat_channels(x3, p3), training);
    nn::Var skip4 = h;
    for (const auto& layer : trunk_) h = layer.forward(h, training);
    h = nn::add(h, skip4);  // skip: layer 4 -> input of layer 12
    h = nn::relu(bn12_.forward(up12_.forward(h, x2.shape()[2], x2.shape()[3]), training));
    h = dec13_.forward(h, training);
    // skip: encoder layer-2 features (both encoders) -> input of layer 14
    h = nn::add(h, nn::add(x2, p2));
    h = nn::relu(bn14_.forward(up14_.forward(h, s_x.shape()[2], s_x.shape()[3]), training));
    h = dec15_.forward(h, training);
    return dec16_.forward(h);  // linear output, 2 channels
  }

  nn::ParamStore& store() { return store_; }
  const NoiseEstimatorSpec& spec() const { return spec_; }

 private:
  NoiseEstimatorSpec spec_;
  nn::ParamStore store_;
  std::vector<nn::ConvBnRelu> enc_x_, enc_p_;
  nn::ConvBnRelu dec4_;
  std::vector<nn::ConvBnRelu> trunk_;
  nn::ConvTranspose2d up12_, up14_;
  nn::BatchNorm2d bn12_, bn14_;
  nn::ConvBnRelu dec13_, dec15_;
  nn::Conv2d dec16_;
};

// ---------------------------------------------------------------------------
// Noise removal R (complex ratio mask head)
// ---------------------------------------------------------------------------

class NoiseRemovalNet {
 public:
  NoiseRemovalNet(const NoiseRemovalSpec& spec, Rng& rng) : spec_(spec) {
    build_encoder("enc_a", enc_a_, spec.filters, spec.enc_out, rng);
    build_encoder("enc_b", enc_b_, std::max<std::int64_t>(1, spec.filters / 2),
                  std::max<std::int64_t>(1, spec.enc_out / 2), rng);
    const std::int64_t cat = spec.enc_out + std::max<std::int64_t>(1, spec.enc_out / 2);
    lstm_ = nn::BiLstm(store_, "lstm", cat * spec.freq_bins, spec.lstm_hidden, rng);
    fc1_ = nn::Linear(store_, "fc1", 2 * spec.lstm_hidden, spec.fc_hidden, rng);
    fc2_ = nn::Linear(store_, "fc2", spec.fc_hidden, spec.fc_hidden, rng);
    fc3_ = nn::Linear(store_, "fc3", spec.fc_hidden, 2 * spec.freq_bins, rng);
  }

  // s_x, s_noise: [N, 2, T, F] -> mask [N, 2, T, F] in [0,1]
  nn::Var forward(const nn::Var& s_x, const nn::Var& s_noise, bool training) {
    require(s_x.shape() == s_noise.shape(), "NoiseRemovalNet: input shape mismatch");
    require(s_x.shape()[3] == spec_.freq_bins, "NoiseRemovalNet: frequency bin mismatch");
    nn::Var a = s_x, b = s_noise;
    for (const auto& c : enc_a_) a = c.forward(a, training);
    for (const auto& c : enc_b_) b = c.forward(b, training);
    nn::Var h = nn::concat_channels(a, b);
    const std::int64_t f = h.shape()[3];
    nn::Var seq = nn::to_sequence(h);
    const std::int64_t n = seq.shape()[0], t = seq.shape()[1];
    nn::Var rnn = lstm_.forward(seq);
    nn::Var flat = nn::reshape(rnn, {n * t, 2 * spec_.lstm_hidden});
    nn::Var f1 = nn::relu(fc1_.forward(flat));
    nn::Var f2 = nn::relu(fc2_.forward(f1));
    nn::Var head = nn::sigmoid(fc3_.forward(f2));            // [N*T, 2F]
    nn::Var frames = nn::reshape(head, {n, t, 2 * f});
    return nn::from_sequence(frames, 2, f);                   // [N, 2, T, F]
  }

  nn::ParamStore& store() { return store_; }
  const NoiseRemovalSpec& spec() const { return spec_; }

 private:
  void build_encoder(const std::string& prefix, std::vector<nn::ConvBnRelu>& enc,
                     std::int64_t filters, std::int64_t out, Rng& rng) {
    static constexpr std::array<std::array<int, 4>, 15> kGeom = {{
        {1, 7, 1, 1},   {7, 1, 1, 1},   {5, 5, 1, 1},  {5, 5, 2, 1},  {5, 5, 4, 1},
        {5, 5, 8, 1},   {5, 5, 16, 1},  {5, 5, 32, 1}, {5, 5, 1, 1},  {5, 5, 2, 2},
        {5, 5, 4, 4},   {5, 5, 8, 8},   {5, 5, 16, 16}, {5, 5, 32, 32}, {1, 1, 1, 1},
    }};
    std::int64_t cin = 2;
    for (std::size_t i = 0; i < kGeom.size(); ++i) {
      const std::int64_t cout = i + 1 < kGeom.size() ? filters : out;
      enc.emplace_back(store_, prefix + std::to_string(i + 1), cin, cout, kGeom[i][0],
                       kGeom[i][1], 1, 1, kGeom[i][2], kGeom[i][3], rng);
      cin = cout;
    }
  }

  NoiseRemovalSpec spec_;
  nn::ParamStore store_;
  std::vector<nn::ConvBnRelu> enc_a_, enc_b_;
  nn::BiLstm lstm_;
  nn::Linear fc1_, fc2_, fc3_;
};

// ---------------------------------------------------------------------------
// Mask application
// ---------------------------------------------------------------------------

// Complex product per bin: (a+bi) * (p+qi). The real per-channel product is
// kept behind MaskProduct::PerChannel.
inline nn::Var apply_mask_op(const nn::Var& spec, const nn::Var& mask,
                             MaskProduct mode = MaskProduct::Complex) {
  using namespace nn;
  require(spec.shape() == mask.shape(), "apply_mask: shape mismatch");
  Var a = slice_channels(spec, 0, 1), b = slice_channels(spec, 1, 2);
  Var p = slice_channels(mask, 0, 1), q = slice_channels(mask, 1, 2);
  if (mode == MaskProduct::PerChannel) return concat_channels(mul(a, p), mul(b, q));
  Var re = sub(mul(a, p), mul(b, q));
  Var im = add(mul(a, q), mul(b, p));
  return concat_channels(re, im);
}

inline Spectrogram apply_mask(const Spectrogram& s, const ComplexRatioMask& c,
                              MaskProduct mode = MaskProduct::Complex) {
  require(s.data.same_shape(c.data), "apply_mask: shape mismatch");
  nn::Var out = apply_mask_op(spec_to_var(s), nn::Var(c.data.reshaped({1, 2, s.frames(), s.bins()})), mode);
  Spectrogram r;
  r.cfg = s.cfg;
  r.data = out.value().reshaped({2, s.frames(), s.bins()});
  return r;
}

// Elementwise product of a waveform and a sample mask: the noise profile
// exposed by silent intervals.
inline Waveform noise_profile(const Waveform& x, const SampleMask& m) {
  require(x.size() == m.size(), "noise_profile: length mismatch");
  Waveform out = x;
  for (std::int64_t i = 0; i < out.size(); ++i) out.samples[i] *= m.values[i];
  return out;
}

// Thresholded confidences -> binary sample mask via the shared boundaries.
inline SampleMask confidences_to_mask(const std::vector<double>& conf, double threshold,
                                      std::int64_t n_samples, int rate) {
  require(threshold >= 0.0 && threshold <= 1.0, "confidences_to_mask: threshold range");
  std::vector<double> binary(conf.size());
  for (std::size_t i = 0; i < conf.size(); ++i)
    binary[i] = conf[i] >= threshold ? 1.0 : 0.0;
  return expand_values_to_samples(binary, n_samples, rate);
}

// Continuous expansion (end-to-end training mode; no thresholding).
inline SampleMask confidences_to_mask_continuous(const std::vector<double>& conf,
                                                 std::int64_t n_samples, int rate) {
  return expand_values_to_samples(conf, n_samples, rate);
}

// ---------------------------------------------------------------------------
// Bundled model
// ---------------------------------------------------------------------------

class DenoiserModel {
 public:
  explicit DenoiserModel(const ModelSpecs& specs, std::uint64_t seed)
      : specs_(specs), seed_(seed), rng_(seed) {
    d_ = std::make_unique<SidNet>(specs.sid, rng_);
    n_ = std::make_unique<NoiseEstNet>(specs.est, rng_);
    r_ = std::make_unique<NoiseRemovalNet>(specs.rem, rng_);
  }

  SidNet& d() { return *d_; }
  NoiseEstNet& n() { return *n_; }
  NoiseRemovalNet& r() { return *r_; }
  const ModelSpecs& specs() const { return specs_; }
  std::uint64_t seed() const { return seed_; }

  // named parameters across components ("d." / "n." / "r." prefixes)
  std::vector<std::pair<std::string, nn::Var>> named_parameters() {
    std::vector<std::pair<std::string, nn::Var>> out;
    for (auto& [name, v] : d_->store().params()) out.emplace_back("d." + name, v);
    for (auto& [name, v] : n_->store().params()) out.emplace_back("n." + name, v);
    for (auto& [name, v] : r_->store().params()) out.emplace_back("r." + name, v);
    return out;
  }
  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> named_buffers() {
    std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> out;
    for (auto& [name, t] : d_->store().buffers()) out.emplace_back("d." + name, t);
    for (auto& [name, t] : n_->store().buffers()) out.emplace_back("n." + name, t);
    for (auto& [name, t] : r_->store().buffers()) out.emplace_back("r." + name, t);
    return out;
  }

 private:
  ModelSpecs specs_;
  std::uint64_t seed_;
  Rng rng_;
  std::unique_ptr<SidNet> d_;
  std::unique_ptr<NoiseEstNet> n_;
  std::unique_ptr<NoiseRemovalNet> r_;
};

// Segment confidences for one clip (inference mode).
inline std::vector<double> sid_confidences(const Waveform& x, DenoiserModel& model) {
  const StftConfig& cfg = model.specs().stft_cfg;
  Spectrogram s = stft(x, cfg);
  require(all_finite(s.data), "sid_confidences: non-finite spectrogram");
  const std::int64_t segs = segment_count(x.size(), cfg.sample_rate);
  auto map = frame_segment_map(s.frames(), x.size(), cfg);
  nn::Var conf = model.d().forward(spec_to_var(s), map, segs, /*training=*/false);
  return conf.value().vec();
}

struct DenoiseResult {
  Waveform denoised;
  SampleMask mask;
  Spectrogram noise_est;
};

// Full chain with an externally supplied sample mask (ground-truth silent
// intervals or perturbations thereof).
inline DenoiseResult denoise_with_mask(const Waveform& x, DenoiserModel& model,
                                       const SampleMask& mask,
                                       MaskProduct mode = MaskProduct::Complex) {
  const StftConfig& cfg = model.specs().stft_cfg;
  require(x.size() >= 1, "denoise: empty input");
  Spectrogram s_x = stft(x, cfg);
  Waveform profile = noise_profile(x, mask);
  Spectrogram s_p = stft(profile, cfg);
  nn::Var vx = spec_to_var(s_x);
  nn::Var est = model.n().forward(vx, spec_to_var(s_p), /*training=*/false);
  nn::Var crm = model.r().forward(vx, est, /*training=*/false);
  nn::Var masked = apply_mask_op(vx, crm, mode);

  DenoiseResult out;
  out.mask = mask;
  out.noise_est = var_to_spec(est.value(), cfg, 0);
  Spectrogram s_out;
  s_out.cfg = cfg;
  s_out.data = masked.value().reshaped({2, s_x.frames(), s_x.bins()});
  out.denoised = istft(s_out, cfg, x.size());
  return out;
}

// Full chain: stft -> D -> threshold -> profile -> N -> R -> mask -> istft.
inline DenoiseResult denoise(const Waveform& x, DenoiserModel& model,
                             double threshold = 0.5,
                             MaskProduct mode = MaskProduct::Complex) {
  std::vector<double> conf = sid_confidences(x, model);
  SampleMask mask = confidences_to_mask(conf, threshold, x.size(),
                                        model.specs().stft_cfg.sample_rate);
  return denoise_with_mask(x, model, mask, mode);
}

}  // namespace hush
