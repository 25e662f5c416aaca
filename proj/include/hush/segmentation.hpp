// segmentation.hpp — the 1/30-second segment grid shared by labeling,
// detection, and mask expansion.

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

#include <cmath>
#include <cstdint>
#include <vector>

#include "hush/common.hpp"

namespace hush {

// Segments per second; matches the duration of one video frame at 30 FPS.
inline constexpr int kSegmentsPerSecond = 30;

// Number of whole-and-partial segments covering n samples.
inline std::int64_t segment_count(std::int64_t n_samples, int rate) {
  require(rate > 0, "segment_count: rate must be positive");
  if (n_samples <= 0) return 0;
  return static_cast<std::int64_t>(
      std::ceil(static_cast<double>(n_samples) * kSegmentsPerSecond / rate - 1e-9));
}

// Start sample of segment i: round(i * rate / 30). Segment i covers
// [boundary(i), boundary(i+1)) intersected with the clip.
inline std::int64_t segment_boundary(std::int64_t i, int rate) {
  return std::llround(static_cast<double>(i) * rate / kSegmentsPerSecond);
}

// Segment index that contains sample j.
inline std::int64_t segment_of_sample(std::int64_t j, int rate) {
  std::int64_t i = static_cast<std::int64_t>(
      static_cast<double>(j) * kSegmentsPerSecond / rate);
  // correct for rounding of the boundaries
  while (segment_boundary(i + 1, rate) <= j) ++i;
  while (i > 0 && segment_boundary(i, rate) > j) --i;
  return i;
}

// Per-segment binary labels in mask polarity: 1 = silent (noise passes
// through), 0 = non-silent.
struct SegmentLabels {
  std::vector<std::uint8_t> labels;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  bool empty() const { return labels.empty(); }
};

// Per-sample binary mask, the sample-rate expansion of SegmentLabels.
struct SampleMask {
  std::vector<double> values;  // binary in {0,1}, or continuous in [0,1]

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

// Expands segment labels to a per-sample mask using the shared boundaries.
inline SampleMask expand_labels_to_samples(const SegmentLabels& labels,
                                           std::int64_t n_samples, int rate) {
  require(rate > 0, "expand_labels_to_samples: rate must be positive");
  if (segment_count(n_samples, rate) != labels.size())
    throw ArgumentError("expand_labels_to_samples: labels do not cover the clip");
  SampleMask m;
  m.values.resize(n_samples, 0.0);
  for (std::int64_t i = 0; i < labels.size(); ++i) {
    const std::int64_t lo = segment_boundary(i, rate);
    const std::int64_t hi = std::min<std::int64_t>(n_samples, segment_boundary(i + 1, rate));
    for (std::int64_t j = lo; j < hi && j < n_samples; ++j)
      m.values[j] = static_cast<double>(labels.labels[i]);
  }
  return m;
}

// Same expansion for continuous per-segment values (confidences).
inline SampleMask expand_values_to_samples(const std::vector<double>& values,
                                           std::int64_t n_samples, int rate) {
  require(segment_count(n_samples, rate) == static_cast<std::int64_t>(values.size()),
          "expand_values_to_samples: values do not cover the clip");
  SampleMask m;
  m.values.resize(n_samples, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::int64_t lo = segment_boundary(static_cast<std::int64_t>(i), rate);
    const std::int64_t hi =
        std::min<std::int64_t>(n_samples, segment_boundary(static_cast<std::int64_t>(i) + 1, rate));
    for (std::int64_t j = lo; j < hi; ++j) m.values[j] = values[i];
  }
  return m;
}

// Majority vote of mask samples back onto the segment grid (ties -> silent).
inline SegmentLabels segment_majority_vote(const SampleMask& mask, int rate) {
  SegmentLabels out;
  const std::int64_t n = mask.size();
  const std::int64_t segs = segment_count(n, rate);
  out.labels.resize(segs, 0);
  for (std::int64_t i = 0; i < segs; ++i) {
    const std::int64_t lo = segment_boundary(i, rate);
    const std::int64_t hi = std::min<std::int64_t>(n, segment_boundary(i + 1, rate));
    std::int64_t ones = 0, total = 0;
    for (std::int64_t j = lo; j < hi; ++j, ++total) ones += mask.values[j] >= 0.5 ? 1 : 0;
    out.labels[i] = (total > 0 && 2 * ones >= total) ? 1 : 0;
  }
  return out;
}

}  // namespace hush
