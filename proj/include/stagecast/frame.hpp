#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stagecast/tensor.hpp"

namespace stagecast {

/// Timestamps are hours since the Unix epoch (hourly resolution throughout).
using HourStamp = std::int64_t;

/// Parses "YYYY-MM-DD HH:MM[:SS]" or the ISO 'T' variant to epoch hours.
HourStamp parse_hour(const std::string& text);
std::string format_hour(HourStamp h);

enum class FeatureRole { Target, PastOnly, FutureKnown };

struct Feature {
  std::string name;  // station column abbreviation, e.g. "TWS_S26"
  std::string unit;
  FeatureRole role;
  bool nonnegative = false;  // physical lower bound at zero (rain, flows)
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<Feature> features);

  /// The station schema of the input CSV contract: four stage targets,
  /// tide + rainfall + gate/pump flows as future-known covariates.
  static FeatureSchema station_default();

  const std::vector<Feature>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const Feature& at(std::size_t i) const { return features_.at(i); }

  std::size_t index_of(const std::string& name) const;  // SchemaError if absent
  bool has(const std::string& name) const;

  const std::vector<std::size_t>& target_columns() const { return target_cols_; }
  const std::vector<std::size_t>& future_columns() const { return future_cols_; }

 private:
  std::vector<Feature> features_;
  std::vector<std::size_t> target_cols_;
  std::vector<std::size_t> future_cols_;
};

/// Contiguous hourly multivariate record set (rows = hours, cols = features).
class TimeSeriesFrame {
 public:
  TimeSeriesFrame() = default;
  TimeSeriesFrame(HourStamp start, RowMatrix values, FeatureSchema schema);

  HourStamp start() const { return start_; }
  HourStamp stamp_at(std::size_t row) const {
    return start_ + static_cast<HourStamp>(row);
  }
  std::size_t length() const { return static_cast<std::size_t>(values_.rows()); }
  const RowMatrix& values() const { return values_; }
  RowMatrix& values() { return values_; }
  const FeatureSchema& schema() const { return schema_; }

  /// Row index for a timestamp inside the frame span; -1 if outside.
  std::ptrdiff_t row_of(HourStamp stamp) const;

 private:
  HourStamp start_ = 0;
  RowMatrix values_;
  FeatureSchema schema_;
};

struct DatasetSplit {
  TimeSeriesFrame train;
  TimeSeriesFrame test;
  HourStamp boundary;
};

/// Reads the hourly station CSV. Gaps of at most max_gap_hours consecutive
/// missing hours are linearly interpolated (and counted); longer gaps throw.
TimeSeriesFrame load_frame(const std::string& path, const FeatureSchema& schema,
                           std::size_t max_gap_hours = 6,
                           std::size_t* interpolated_rows = nullptr);

/// train = records strictly before boundary; test = records at/after it.
DatasetSplit split_by_date(const TimeSeriesFrame& frame, HourStamp boundary);

/// Min-max feature scaling fitted on the training split only.
class Normalizer {
 public:
  Normalizer() = default;

  static Normalizer fit(const TimeSeriesFrame& train);

  TimeSeriesFrame apply(const TimeSeriesFrame& frame) const;
  TimeSeriesFrame invert(const TimeSeriesFrame& frame) const;

  double apply_value(std::size_t col, double x) const;
  double invert_value(std::size_t col, double x) const;  // degenerate -> error

  std::size_t size() const { return mins_.size(); }
  double min_of(std::size_t col) const { return mins_.at(col); }
  double max_of(std::size_t col) const { return maxs_.at(col); }
  double range_of(std::size_t col) const { return maxs_.at(col) - mins_.at(col); }
  bool degenerate(std::size_t col) const { return degenerate_.at(col); }

  void set_stats(std::vector<double> mins, std::vector<double> maxs);

 private:
  std::vector<double> mins_;
  std::vector<double> maxs_;
  std::vector<bool> degenerate_;
};

}  // namespace stagecast
