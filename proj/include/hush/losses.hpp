// losses.hpp — the denoising objective and the silent-interval BCE.

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

#include "hush/models.hpp"

namespace hush {

struct LossBreakdown {
  double noise_term = 0.0;   // || N(s_x, s_profile) - s_noise ||_2
  double signal_term = 0.0;  // || s_x (x) R(...) - s_clean ||_2
  double bce_term = 0.0;     // silent-interval BCE when applicable
  double total = 0.0;
};

struct LossVars {
  nn::Var total;
  LossBreakdown values;
};

// Denoising objective: per-item L2 norms of the flattened 2-channel
// spectrogram differences, averaged over the batch. `noise_weight` scales the
// noise-estimation term (0 disables it); `beta` balances the signal term.
inline LossVars denoising_loss(DenoiserModel& model, const nn::Var& s_x,
                               const nn::Var& s_profile, const Tensor& target_noise,
                               const Tensor& target_clean, double beta,
                               double noise_weight, bool training,
                               MaskProduct mode = MaskProduct::Complex) {
  using namespace nn;
  require(s_x.value().same_shape(s_profile.value()), "denoising_loss: shape mismatch");
  require(s_x.value().same_shape(target_noise) && s_x.value().same_shape(target_clean),
          "denoising_loss: target shape mismatch");
  Var est = model.n().forward(s_x, s_profile, training);
  Var crm = model.r().forward(s_x, est, training);
  Var masked = apply_mask_op(s_x, crm, mode);
  Var noise_term = batch_l2norm_mean(sub(est, Var(target_noise)));
  Var signal_term = batch_l2norm_mean(sub(masked, Var(target_clean)));
  Var total = add_scalar_weighted(noise_term, signal_term, noise_weight, beta);

  LossVars out;
  out.total = total;
  out.values.noise_term = noise_term.value()[0];
  out.values.signal_term = signal_term.value()[0];
  out.values.total = total.value()[0];
  return out;
}

// Non-autograd convenience: evaluates the objective for given spectrograms.
inline LossBreakdown loss_L0(const Spectrogram& s_x, const Spectrogram& s_profile,
                             const Spectrogram& target_noise, const Spectrogram& target_clean,
                             DenoiserModel& model, double beta = 1.0,
                             double noise_weight = 1.0) {
  nn::Var vx = spec_to_var(s_x);
  nn::Var vp = spec_to_var(s_profile);
  LossVars lv = denoising_loss(
      model, vx, vp, target_noise.data.reshaped({1, 2, s_x.frames(), s_x.bins()}),
      target_clean.data.reshaped({1, 2, s_x.frames(), s_x.bins()}), beta, noise_weight,
      /*training=*/false);
  return lv.values;
}

// Mean binary cross entropy between per-segment confidences and labels.
inline double loss_L1(const std::vector<double>& pred, const SegmentLabels& truth) {
  require(pred.size() == truth.labels.size(), "loss_L1: length mismatch");
  require(!pred.empty(), "loss_L1: empty input");
  Tensor target({static_cast<std::int64_t>(pred.size())});
  for (std::size_t i = 0; i < truth.labels.size(); ++i)
    target[static_cast<std::int64_t>(i)] = truth.labels[i];
  nn::Var p(Tensor({static_cast<std::int64_t>(pred.size())},
                   std::vector<double>(pred.begin(), pred.end())));
  return nn::bce_mean(p, target).value()[0];
}

}  // namespace hush
