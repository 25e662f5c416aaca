// training.hpp — optimizer, training set, and the training schedules.

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

#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hush/checkpoint.hpp"
#include "hush/datagen.hpp"
#include "hush/losses.hpp"
#include "hush/models.hpp"

namespace hush {

// ---------------------------------------------------------------------------
// Optimizer: Adam with the framework-default moments (0.9, 0.999, 1e-8).
// ---------------------------------------------------------------------------

namespace nn {

class Adam {
 public:
  Adam(std::vector<std::pair<std::string, Var>> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto& [name, v] : params_) {
      m_.emplace_back(v.value().shape());
      v2_.emplace_back(v.value().shape());
    }
  }

  void zero_grad() {
    for (auto& [name, p] : params_) p.grad().fill(0.0);
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& w = params_[i].second.value();
      const Tensor& g = params_[i].second.grad();
      Tensor& m = m_[i];
      Tensor& v = v2_[i];
      for (std::int64_t k = 0; k < w.numel(); ++k) {
        m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
        v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        w[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  nlohmann::json config() const {
    return {{"optimizer", "adam"}, {"lr", lr_}, {"beta1", beta1_},
            {"beta2", beta2_},     {"eps", eps_}};
  }

 private:
  std::vector<std::pair<std::string, Var>> params_;
  std::vector<Tensor> m_, v2_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace nn

// ---------------------------------------------------------------------------
// Training configuration
// ---------------------------------------------------------------------------

enum class TrainPhase { Sid, DenoiserGt, Finetune, EndToEnd, Joint };

inline const char* phase_name(TrainPhase p) {
  switch (p) {
    case TrainPhase::Sid: return "sid";
    case TrainPhase::DenoiserGt: return "denoiser_gt";
    case TrainPhase::Finetune: return "finetune";
    case TrainPhase::EndToEnd: return "end_to_end";
    case TrainPhase::Joint: return "joint";
  }
  return "?";
}

inline TrainPhase phase_from_name(const std::string& s) {
  if (s == "sid") return TrainPhase::Sid;
  if (s == "denoiser_gt") return TrainPhase::DenoiserGt;
  if (s == "finetune") return TrainPhase::Finetune;
  if (s == "end_to_end") return TrainPhase::EndToEnd;
  if (s == "joint") return TrainPhase::Joint;
  throw ConfigError("unknown training phase: " + s);
}

struct TrainingConfig {
  TrainPhase phase = TrainPhase::Sid;
  double beta = 1.0;          // Eq. balance between noise and signal terms
  double noise_weight = 1.0;  // 0 disables the noise-estimation term
  double bce_weight = 1.0;    // weight of the silent-interval term in joint mode
  double lr = 0.001;
  int epochs = 0;      // 0 -> phase default (SID: 100, others: 50)
  int batch_size = 0;  // 0 -> phase default (SID: 15, others: 20)
  std::uint64_t seed = 0;
  double threshold = 0.5;          // confidence threshold for predicted masks
  bool mask_override_ones = false;  // noise profile := the noisy signal itself
  int start_epoch = 0;             // resume support
  std::string rng_state;           // serialized mt19937_64 state for resume

  int effective_epochs() const {
    if (epochs > 0) return epochs;
    return phase == TrainPhase::Sid ? 100 : 50;
  }
  int effective_batch() const {
    if (batch_size > 0) return batch_size;
    return phase == TrainPhase::Sid ? 15 : 20;
  }

  void validate() const {
    if (beta <= 0.0) throw ConfigError("TrainingConfig: beta must be positive");
    if (lr <= 0.0) throw ConfigError("TrainingConfig: lr must be positive");
    if (effective_epochs() < 1) throw ConfigError("TrainingConfig: epochs must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// In-memory training set with cached spectrogram tensors
// ---------------------------------------------------------------------------

struct TrainClip {
  Waveform mixture, clean, noise;
  SegmentLabels labels;
  double snr_db = 0.0;
  Tensor s_x, s_clean, s_noise, s_profile_gt;  // [2, T, F] each
};

struct TrainingSet {
  std::vector<TrainClip> clips;
  StftConfig cfg;
  std::int64_t samples = 0;   // per clip
  std::int64_t frames = 0;    // per clip
  std::int64_t segments = 0;  // per clip

  void precompute() {
    require(!clips.empty(), "TrainingSet: empty");
    samples = clips.front().mixture.size();
    segments = segment_count(samples, cfg.sample_rate);
    for (auto& c : clips) {
      require(c.mixture.size() == samples, "TrainingSet: clips must share one length");
      require(c.labels.size() == segments, "TrainingSet: label coverage mismatch");
      c.s_x = stft(c.mixture, cfg).data;
      c.s_clean = stft(c.clean, cfg).data;
      c.s_noise = stft(c.noise, cfg).data;
      SampleMask gt = expand_labels_to_samples(c.labels, samples, cfg.sample_rate);
      c.s_profile_gt = stft(noise_profile(c.mixture, gt), cfg).data;
    }
    frames = clips.front().s_x.dim(1);
  }
};

// Loads one split of a synthesized dataset from disk.
inline TrainingSet load_training_set(const DatasetManifest& manifest,
                                     const std::string& root, const std::string& split,
                                     const StftConfig& cfg) {
  TrainingSet set;
  set.cfg = cfg;
  for (const auto* rec : manifest.split(split)) {
    TrainClip c;
    c.mixture = load_wav(root + "/" + rec->mixture);
    c.clean = load_wav(root + "/" + rec->clean);
    c.noise = load_wav(root + "/" + rec->noise);
    c.labels = load_labels(root + "/" + rec->labels);
    c.snr_db = rec->snr_db;
    set.clips.push_back(std::move(c));
  }
  if (set.clips.empty()) throw ConfigError("load_training_set: no clips in split " + split);
  set.precompute();
  return set;
}

// ---------------------------------------------------------------------------
// Batching helpers
// ---------------------------------------------------------------------------

namespace detail {

inline Tensor gather_specs(const TrainingSet& set, const std::vector<std::size_t>& idx,
                           Tensor TrainClip::*field) {
  const std::int64_t t = set.frames, f = set.cfg.bins();
  Tensor out({static_cast<std::int64_t>(idx.size()), 2, t, f});
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n((set.clips[idx[i]].*field).data(), 2 * t * f, out.data() + i * 2 * t * f);
  return out;
}

inline Tensor gather_labels(const TrainingSet& set, const std::vector<std::size_t>& idx) {
  Tensor out({static_cast<std::int64_t>(idx.size()), set.segments});
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::int64_t s = 0; s < set.segments; ++s)
      out.at(static_cast<std::int64_t>(i), s) = set.clips[idx[i]].labels.labels[s];
  return out;
}

inline Tensor gather_waveforms(const TrainingSet& set, const std::vector<std::size_t>& idx) {
  Tensor out({static_cast<std::int64_t>(idx.size()), set.samples});
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(set.clips[idx[i]].mixture.samples.data(), set.samples,
                out.data() + i * set.samples);
  return out;
}

inline std::vector<std::vector<std::size_t>> make_batches(std::size_t n, int batch,
                                                          Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch)
    out.emplace_back(order.begin() + i,
                     order.begin() + std::min(n, i + static_cast<std::size_t>(batch)));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double noise_term = 0.0;
  double signal_term = 0.0;
  double bce_term = 0.0;
  int steps = 0;
};

// Called after every epoch; receives the live model and the RNG so callers
// can write resumable checkpoints.
using EpochHook = std::function<void(const EpochStats&, DenoiserModel&, Rng&)>;

struct TrainResult {
  std::vector<EpochStats> history;

  double first_loss() const { return history.front().loss; }
  double last_loss() const { return history.back().loss; }
};

namespace detail {

inline void set_requires_grad(nn::ParamStore& store, bool value) {
  for (auto& [name, v] : store.params()) v.node()->requires_grad = value;
}

inline Rng restore_rng(const TrainingConfig& cfg) {
  Rng rng(cfg.seed);
  if (!cfg.rng_state.empty()) {
    std::istringstream is(cfg.rng_state);
    is >> rng;
    if (!is) throw ConfigError("TrainingConfig: bad rng_state");
  }
  return rng;
}

inline std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

}  // namespace detail

// Phase 1: supervised silent interval detection (Eq. BCE objective).
inline TrainResult train_sid(DenoiserModel& model, const TrainingSet& set,
                             const TrainingConfig& cfg, const EpochHook& hook = {}) {
  cfg.validate();
  if (set.clips.empty()) throw ConfigError("train_sid: empty dataset");
  detail::set_requires_grad(model.d().store(), true);
  std::vector<std::pair<std::string, nn::Var>> params;
  for (auto& kv : model.d().store().params()) params.push_back(kv);
  nn::Adam opt(params, cfg.lr);
  Rng rng = detail::restore_rng(cfg);
  const auto map = frame_segment_map(set.frames, set.samples, set.cfg);

  TrainResult result;
  for (int epoch = cfg.start_epoch; epoch < cfg.effective_epochs(); ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    for (const auto& batch : detail::make_batches(set.clips.size(), cfg.effective_batch(), rng)) {
      Tensor s_x = detail::gather_specs(set, batch, &TrainClip::s_x);
      Tensor labels = detail::gather_labels(set, batch);
      nn::Var conf = model.d().forward(nn::Var(std::move(s_x)), map, set.segments, true);
      nn::Var loss = nn::bce_mean(conf, labels);
      opt.zero_grad();
      nn::backward(loss);
      opt.step();
      stats.loss += loss.value()[0];
      stats.bce_term += loss.value()[0];
      ++stats.steps;
    }
    stats.loss /= stats.steps;
    stats.bce_term /= stats.steps;
    result.history.push_back(stats);
    if (hook) hook(stats, model, rng);
  }
  return result;
}

namespace detail {

// Shared epoch loop for the denoising objective with a fixed noise profile
// spectrogram per clip (ground-truth or predicted silent intervals).
inline TrainResult run_denoiser_epochs(DenoiserModel& model, const TrainingSet& set,
                                       const TrainingConfig& cfg,
                                       const std::vector<Tensor>& profiles,
                                       const EpochHook& hook) {
  std::vector<std::pair<std::string, nn::Var>> params;
  for (auto& kv : model.n().store().params()) params.push_back(kv);
  for (auto& kv : model.r().store().params()) params.push_back(kv);
  nn::Adam opt(params, cfg.lr);
  Rng rng = restore_rng(cfg);

  TrainResult result;
  const std::int64_t t = set.frames, f = set.cfg.bins();
  for (int epoch = cfg.start_epoch; epoch < cfg.effective_epochs(); ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    for (const auto& batch : make_batches(set.clips.size(), cfg.effective_batch(), rng)) {
      Tensor s_x = gather_specs(set, batch, &TrainClip::s_x);
      Tensor s_noise = gather_specs(set, batch, &TrainClip::s_noise);
      Tensor s_clean = gather_specs(set, batch, &TrainClip::s_clean);
      Tensor prof({static_cast<std::int64_t>(batch.size()), 2, t, f});
      for (std::size_t i = 0; i < batch.size(); ++i)
        std::copy_n(profiles[batch[i]].data(), 2 * t * f, prof.data() + i * 2 * t * f);

      LossVars lv = denoising_loss(model, nn::Var(std::move(s_x)), nn::Var(std::move(prof)),
                                   s_noise, s_clean, cfg.beta, cfg.noise_weight, true);
      opt.zero_grad();
      nn::backward(lv.total);
      opt.step();
      stats.loss += lv.values.total;
      stats.noise_term += lv.values.noise_term;
      stats.signal_term += lv.values.signal_term;
      ++stats.steps;
    }
    stats.loss /= stats.steps;
    stats.noise_term /= stats.steps;
    stats.signal_term /= stats.steps;
    result.history.push_back(stats);
    if (hook) hook(stats, model, rng);
  }
  return result;
}

}  // namespace detail

// Phase 2: noise estimation + removal with ground-truth silent intervals.
// D is untouched.
inline TrainResult train_denoiser_gt(DenoiserModel& model, const TrainingSet& set,
                                     const TrainingConfig& cfg, const EpochHook& hook = {}) {
  cfg.validate();
  if (set.clips.empty()) throw ConfigError("train_denoiser_gt: empty dataset");
  detail::set_requires_grad(model.d().store(), false);
  detail::set_requires_grad(model.n().store(), true);
  detail::set_requires_grad(model.r().store(), true);
  std::vector<Tensor> profiles;
  profiles.reserve(set.clips.size());
  for (const auto& c : set.clips) {
    if (cfg.mask_override_ones)
      profiles.push_back(c.s_x);  // profile == the noisy signal itself
    else
      profiles.push_back(c.s_profile_gt);
  }
  return detail::run_denoiser_epochs(model, set, cfg, profiles, hook);
}

// Phase 3: freeze D; feed its thresholded predictions to N and R.
inline TrainResult finetune(DenoiserModel& model, const TrainingSet& set,
                            const TrainingConfig& cfg, const EpochHook& hook = {}) {
  cfg.validate();
  if (set.clips.empty()) throw ConfigError("finetune: empty dataset");
  detail::set_requires_grad(model.d().store(), false);
  detail::set_requires_grad(model.n().store(), true);
  detail::set_requires_grad(model.r().store(), true);

  // D is fixed: predicted masks (and their profile spectrograms) are constants.
  std::vector<Tensor> profiles;
  profiles.reserve(set.clips.size());
  const auto map = frame_segment_map(set.frames, set.samples, set.cfg);
  for (const auto& c : set.clips) {
    nn::Var conf = model.d().forward(nn::Var(c.s_x.reshaped({1, 2, set.frames, set.cfg.bins()})),
                                     map, set.segments, false);
    SampleMask mask = confidences_to_mask(conf.value().vec(), cfg.threshold, set.samples,
                                          set.cfg.sample_rate);
    profiles.push_back(stft(noise_profile(c.mixture, mask), set.cfg).data);
  }
  return detail::run_denoiser_epochs(model, set, cfg, profiles, hook);
}

// Joint objective: denoising loss plus bce_weight * silent-interval BCE, with
// D's continuous mask in the chain (no thresholding anywhere).
// bce_weight == 0 is the pure end-to-end schedule and needs no labels.
inline TrainResult train_joint(DenoiserModel& model, const TrainingSet& set,
                               const TrainingConfig& cfg, const EpochHook& hook = {}) {
  cfg.validate();
  if (set.clips.empty()) throw ConfigError("train_joint: empty dataset");
  detail::set_requires_grad(model.d().store(), true);
  detail::set_requires_grad(model.n().store(), true);
  detail::set_requires_grad(model.r().store(), true);
  std::vector<std::pair<std::string, nn::Var>> params = model.named_parameters();
  nn::Adam opt(params, cfg.lr);
  Rng rng = detail::restore_rng(cfg);
  const auto map = frame_segment_map(set.frames, set.samples, set.cfg);

  TrainResult result;
  for (int epoch = cfg.start_epoch; epoch < cfg.effective_epochs(); ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    for (const auto& batch : detail::make_batches(set.clips.size(), cfg.effective_batch(), rng)) {
      Tensor s_x_t = detail::gather_specs(set, batch, &TrainClip::s_x);
      Tensor s_noise = detail::gather_specs(set, batch, &TrainClip::s_noise);
      Tensor s_clean = detail::gather_specs(set, batch, &TrainClip::s_clean);
      Tensor wave = detail::gather_waveforms(set, batch);

      nn::Var s_x(std::move(s_x_t));
      nn::Var conf = model.d().forward(s_x, map, set.segments, true);       // [B, S]
      nn::Var mask = nn::expand_segments(conf, set.samples, set.cfg.sample_rate);
      nn::Var profile_wave = nn::mul(nn::Var(std::move(wave)), mask);
      nn::Var s_profile = nn::stft_op(profile_wave, set.cfg);

      LossVars lv = denoising_loss(model, s_x, s_profile, s_noise, s_clean, cfg.beta,
                                   cfg.noise_weight, true);
      nn::Var total = lv.total;
      double bce_val = 0.0;
      if (cfg.bce_weight != 0.0) {
        Tensor labels = detail::gather_labels(set, batch);
        nn::Var bce = nn::bce_mean(conf, labels);
        bce_val = bce.value()[0];
        total = nn::add_scalar_weighted(total, bce, 1.0, cfg.bce_weight);
      }
      opt.zero_grad();
      nn::backward(total);
      opt.step();
      stats.loss += total.value()[0];
      stats.noise_term += lv.values.noise_term;
      stats.signal_term += lv.values.signal_term;
      stats.bce_term += bce_val;
      ++stats.steps;
    }
    stats.loss /= stats.steps;
    stats.noise_term /= stats.steps;
    stats.signal_term /= stats.steps;
    stats.bce_term /= stats.steps;
    result.history.push_back(stats);
    if (hook) hook(stats, model, rng);
  }
  return result;
}

// End-to-end training with only denoising supervision.
inline TrainResult train_end_to_end(DenoiserModel& model, const TrainingSet& set,
                                    const TrainingConfig& cfg, const EpochHook& hook = {}) {
  TrainingConfig c = cfg;
  c.bce_weight = 0.0;
  return train_joint(model, set, c, hook);
}

// ---------------------------------------------------------------------------
// Evaluation helpers for the toy-scale behavioral checks
// ---------------------------------------------------------------------------

// Segment classification accuracy of D at a threshold.
inline double sid_accuracy(DenoiserModel& model, const TrainingSet& set,
                           double threshold = 0.5) {
  const auto map = frame_segment_map(set.frames, set.samples, set.cfg);
  std::int64_t hits = 0, total = 0;
  for (const auto& c : set.clips) {
    nn::Var conf = model.d().forward(nn::Var(c.s_x.reshaped({1, 2, set.frames, set.cfg.bins()})),
                                     map, set.segments, false);
    for (std::int64_t s = 0; s < set.segments; ++s) {
      const int pred = conf.value()[s] >= threshold ? 1 : 0;
      hits += pred == c.labels.labels[s] ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// AUC of D's confidences for separating silent from non-silent segments.
inline double sid_auc(DenoiserModel& model, const TrainingSet& set) {
  const auto map = frame_segment_map(set.frames, set.samples, set.cfg);
  std::vector<std::pair<double, int>> scored;
  for (const auto& c : set.clips) {
    nn::Var conf = model.d().forward(nn::Var(c.s_x.reshaped({1, 2, set.frames, set.cfg.bins()})),
                                     map, set.segments, false);
    for (std::int64_t s = 0; s < set.segments; ++s)
      scored.emplace_back(conf.value()[s], c.labels.labels[s]);
  }
  // rank-sum AUC with tie handling
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  std::int64_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second == 1) rank_sum += avg_rank;
    i = j;
  }
  for (const auto& [score, label] : scored) (label == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  return (rank_sum - 0.5 * n_pos * (n_pos + 1)) / (static_cast<double>(n_pos) * n_neg);
}

}  // namespace hush
