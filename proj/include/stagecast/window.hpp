#pragma once

#include "stagecast/frame.hpp"

namespace stagecast {

/// One training/inference example from sliding-window extraction: w past steps
/// of every measured feature, k future steps of the future-known covariates,
/// and the k x 4 stage targets over the same future timestamps.
struct WindowSample {
  HourStamp anchor = 0;   // time t, the last past timestamp
  Tensor past;            // w x n_features
  Tensor future;          // k x n_future (columns in schema future order)
  Tensor target;          // k x n_targets
};

/// All stride-1 windows of the frame, ordered by anchor time.
/// Sample count is length - w - k + 1; throws when the frame is shorter
/// than w + k records.
std::vector<WindowSample> build_windows(const TimeSeriesFrame& frame,
                                        std::size_t w, std::size_t k);

/// Gaussian perturbation of selected future-known covariates in the future
/// block only, used by the robustness study. Samples are in normalized
/// space; the noise standard deviation is `fraction` of the training range
/// (which min-max scaling maps to exactly `fraction` in normalized units).
/// Nonnegative features are clamped at physical zero. Deterministic per seed.
std::vector<WindowSample> inject_noise(const std::vector<WindowSample>& samples,
                                       double fraction,
                                       const std::vector<std::string>& features,
                                       std::uint64_t seed,
                                       const FeatureSchema& schema,
                                       const Normalizer& normalizer);

}  // namespace stagecast
