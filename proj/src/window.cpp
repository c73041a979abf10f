#include "stagecast/window.hpp"

#include <algorithm>

#include "stagecast/rng.hpp"

namespace stagecast {

namespace {
Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }
}

std::vector<WindowSample> build_windows(const TimeSeriesFrame& frame,
                                        std::size_t w, std::size_t k) {
  if (w == 0 || k == 0) throw ArgumentError("window extents w and k must be positive");
  const std::size_t length = frame.length();
  if (length < w + k)
    throw DataError("insufficient data: " + std::to_string(length) +
                    " records, need at least w + k = " + std::to_string(w + k));
  const FeatureSchema& schema = frame.schema();
  const auto& targets = schema.target_columns();
  const auto& futures = schema.future_columns();
  const std::size_t n_feat = schema.size();

  std::vector<WindowSample> samples;
  samples.reserve(length - w - k + 1);
  for (std::size_t anchor_row = w - 1; anchor_row + k < length; ++anchor_row) {
    WindowSample s;
    s.anchor = frame.stamp_at(anchor_row);
    s.past = Tensor({w, n_feat});
    s.past.as_matrix() =
        frame.values().middleRows(idx(anchor_row + 1 - w), idx(w));
    s.future = Tensor({k, futures.size()});
    s.target = Tensor({k, targets.size()});
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::Index row = idx(anchor_row + 1 + j);
      for (std::size_t c = 0; c < futures.size(); ++c)
        s.future.at(j, c) = frame.values()(row, idx(futures[c]));
      for (std::size_t c = 0; c < targets.size(); ++c)
        s.target.at(j, c) = frame.values()(row, idx(targets[c]));
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<WindowSample> inject_noise(const std::vector<WindowSample>& samples,
                                       double fraction,
                                       const std::vector<std::string>& features,
                                       std::uint64_t seed,
                                       const FeatureSchema& schema,
                                       const Normalizer& normalizer) {
  if (fraction < 0.0) throw ArgumentError("noise fraction must be nonnegative");
  const auto& futures = schema.future_columns();

  // Map requested feature names to columns of the future block.
  std::vector<std::size_t> block_cols;
  std::vector<std::size_t> schema_cols;
  for (const std::string& name : features) {
    const std::size_t col = schema.index_of(name);
    const auto it = std::find(futures.begin(), futures.end(), col);
    if (it == futures.end())
      throw SchemaError("feature '" + name + "' is not future-known");
    block_cols.push_back(static_cast<std::size_t>(it - futures.begin()));
    schema_cols.push_back(col);
  }

  std::vector<WindowSample> out = samples;
  if (fraction == 0.0) return out;

  Rng rng(seed);
  for (WindowSample& s : out) {
    const std::size_t k = s.future.extent(0);
    for (std::size_t c = 0; c < block_cols.size(); ++c) {
      const std::size_t col = schema_cols[c];
      if (normalizer.degenerate(col)) continue;  // zero training range, zero noise
      // Lower clamp at physical zero, expressed in normalized units.
      const bool clamp_low = schema.at(col).nonnegative;
      const double floor = -normalizer.min_of(col) / normalizer.range_of(col);
      for (std::size_t j = 0; j < k; ++j) {
        double v = s.future.at(j, block_cols[c]) + fraction * rng.next_gaussian();
        if (clamp_low && v < floor) v = floor;
        s.future.at(j, block_cols[c]) = v;
      }
    }
  }
  return out;
}

}  // namespace stagecast
