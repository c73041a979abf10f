#pragma once

#include <json.hpp>

#include "stagecast/metrics.hpp"
#include "stagecast/model.hpp"

namespace stagecast {

struct MetricsCell {
  double mae = 0.0;
  double rmse = 0.0;
  double nse = 0.0;
  double kge = 0.0;
  double r = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double extreme_total = 0.0;
  double extreme_over = 0.0;
  double extreme_under = 0.0;
  std::size_t n = 0;
};

/// MAE/RMSE/NSE/KGE plus extreme-error fractions, broken down by lead time
/// and by location, with an everything-pooled cell.
struct MetricsReport {
  std::vector<std::pair<std::string, MetricsCell>> by_lead_time;  // "t+1", ...
  std::vector<std::pair<std::string, MetricsCell>> by_location;   // "S1", ...
  MetricsCell overall;
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

/// Lead-time slice presets: "table" = {1, 8, 16, 24}; "figure" = {1, 12, 18, 24}.
std::vector<int> lead_slices_preset(const std::string& name);

/// Predictions in feet, aligned with the observation frame via anchor rows.
struct EvalSet {
  std::vector<std::size_t> anchor_rows;  // frame row of time t per sample
  Tensor predictions_feet;               // (batch, k, targets)
};

struct RawError {
  std::string location;
  int lead_time;
  HourStamp timestamp;
  double observed;
  double predicted;
};

/// Denormalize target-channel predictions from normalized space to feet.
Tensor denormalize_predictions(const Tensor& predictions, const Normalizer& n,
                               const std::vector<std::size_t>& target_columns);

/// Observed/predicted pairs for one lead-time slice (0 pools all leads) and
/// one location column (-1 pools all locations).
ErrorDistribution collect_distribution(const EvalSet& eval,
                                       const TimeSeriesFrame& observations,
                                       int lead_time, int location_index);

MetricsReport breakdown(const EvalSet& eval, const TimeSeriesFrame& observations,
                        const std::vector<int>& lead_slices, double threshold);

std::vector<RawError> raw_errors(const EvalSet& eval,
                                 const TimeSeriesFrame& observations);

void write_raw_errors_csv(const std::vector<RawError>& rows, const std::string& path);

/// External (e.g. physics-simulation) stage predictions: by construction
/// lead-time-invariant, so every lead slice repeats the same values.
MetricsReport compare_external(const TimeSeriesFrame& external,
                               const TimeSeriesFrame& observations,
                               const std::vector<int>& lead_slices,
                               double threshold);

/// Reads `timestamp,WS_S1,TWS_S25A,TWS_S25B,TWS_S26` in feet.
TimeSeriesFrame load_external_predictions(const std::string& path);

struct TimingResult {
  double seconds = 0.0;         // median over repeats of a full test pass
  double samples_per_second = 0.0;
  std::size_t samples = 0;
  bool undefined = false;       // empty test set
};

TimingResult time_inference(SurrogateModel& model,
                            const std::vector<WindowSample>& test,
                            std::size_t repeats = 3);

}  // namespace stagecast
