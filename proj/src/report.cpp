#include "stagecast/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace stagecast {

using nlohmann::json;

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// "TWS_S25A" -> "S25A", "WS_S1" -> "S1".
std::string location_of(const std::string& feature_name) {
  if (feature_name.rfind("TWS_", 0) == 0) return feature_name.substr(4);
  if (feature_name.rfind("WS_", 0) == 0) return feature_name.substr(3);
  return feature_name;
}

MetricsCell cell_from_distribution(const ErrorDistribution& dist, double threshold) {
  MetricsCell cell;
  cell.n = dist.size();
  cell.mae = mae(dist);
  cell.rmse = rmse(dist);
  try {
    cell.nse = nse(dist);
  } catch (const NumericError&) {
    cell.nse = std::numeric_limits<double>::quiet_NaN();
  }
  try {
    const KgeResult k = kge(dist);
    cell.kge = k.kge;
    cell.r = k.r;
    cell.alpha = k.alpha;
    cell.beta = k.beta;
  } catch (const NumericError&) {
    cell.kge = cell.r = cell.alpha = cell.beta =
        std::numeric_limits<double>::quiet_NaN();
  }
  const ExtremeFractions f = extreme_error_fraction(dist, threshold);
  cell.extreme_total = f.total;
  cell.extreme_over = f.over;
  cell.extreme_under = f.under;
  return cell;
}

json cell_to_json(const MetricsCell& c) {
  json j;
  j["mae"] = c.mae;
  j["rmse"] = c.rmse;
  j["nse"] = c.nse;
  j["kge"] = c.kge;
  j["r"] = c.r;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["extreme_total"] = c.extreme_total;
  j["extreme_over"] = c.extreme_over;
  j["extreme_under"] = c.extreme_under;
  j["n"] = c.n;
  return j;
}

void check_alignment(const EvalSet& eval, const TimeSeriesFrame& observations) {
  if (eval.predictions_feet.rank() != 3)
    throw DimensionError("predictions must be (batch, k, targets), got " +
                         eval.predictions_feet.shape_str());
  if (eval.anchor_rows.size() != eval.predictions_feet.extent(0))
    throw ArgumentError("prediction batch and anchor rows disagree");
  const std::size_t k = eval.predictions_feet.extent(1);
  const std::size_t n_t = eval.predictions_feet.extent(2);
  if (n_t != observations.schema().target_columns().size())
    throw SchemaError("prediction target count " + std::to_string(n_t) +
                      " vs schema " +
                      std::to_string(observations.schema().target_columns().size()));
  for (std::size_t row : eval.anchor_rows)
    if (row + k >= observations.length())
      throw ArgumentError("prediction anchored at row " + std::to_string(row) +
                          " extends past the observation frame");
}

}  // namespace

std::vector<int> lead_slices_preset(const std::string& name) {
  if (name == "table") return {1, 8, 16, 24};
  if (name == "figure") return {1, 12, 18, 24};
  throw ArgumentError("unknown lead-slice preset '" + name +
                      "' (expected 'table' or 'figure')");
}

Tensor denormalize_predictions(const Tensor& predictions, const Normalizer& n,
                               const std::vector<std::size_t>& target_columns) {
  if (predictions.rank() != 3)
    throw DimensionError("predictions must be (batch, k, targets), got " +
                         predictions.shape_str());
  const std::size_t batch = predictions.extent(0);
  const std::size_t k = predictions.extent(1);
  const std::size_t n_t = predictions.extent(2);
  if (n_t != target_columns.size())
    throw DimensionError("prediction channels vs target columns");
  Tensor out = predictions;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < n_t; ++c) {
        const std::size_t at = (b * k + j) * n_t + c;
        out[at] = n.invert_value(target_columns[c], predictions[at]);
      }
  return out;
}

ErrorDistribution collect_distribution(const EvalSet& eval,
                                       const TimeSeriesFrame& observations,
                                       int lead_time, int location_index) {
  check_alignment(eval, observations);
  const std::size_t batch = eval.predictions_feet.extent(0);
  const std::size_t k = eval.predictions_feet.extent(1);
  const std::size_t n_t = eval.predictions_feet.extent(2);
  const auto& target_cols = observations.schema().target_columns();

  std::vector<double> obs, pred;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t row = eval.anchor_rows[b];
    for (std::size_t j = 1; j <= k; ++j) {
      if (lead_time != 0 && static_cast<int>(j) != lead_time) continue;
      for (std::size_t c = 0; c < n_t; ++c) {
        if (location_index >= 0 && static_cast<int>(c) != location_index) continue;
        obs.push_back(observations.values()(idx(row + j), idx(target_cols[c])));
        pred.push_back(eval.predictions_feet[(b * k + (j - 1)) * n_t + c]);
      }
    }
  }
  ErrorDistribution dist;
  dist.observed = Eigen::Map<Eigen::VectorXd>(obs.data(), idx(obs.size()));
  dist.predicted = Eigen::Map<Eigen::VectorXd>(pred.data(), idx(pred.size()));
  dist.lead_time = lead_time;
  if (location_index >= 0)
    dist.location = location_of(
        observations.schema().at(target_cols[static_cast<std::size_t>(location_index)])
            .name);
  return dist;
}

MetricsReport breakdown(const EvalSet& eval, const TimeSeriesFrame& observations,
                        const std::vector<int>& lead_slices, double threshold) {
  check_alignment(eval, observations);
  MetricsReport report;
  report.threshold = threshold;
  const std::size_t k = eval.predictions_feet.extent(1);

  for (int lead : lead_slices) {
    if (lead < 1 || static_cast<std::size_t>(lead) > k)
      throw ArgumentError("lead-time slice " + std::to_string(lead) +
                          " outside horizon 1.." + std::to_string(k));
    report.by_lead_time.emplace_back(
        "t+" + std::to_string(lead),
        cell_from_distribution(collect_distribution(eval, observations, lead, -1),
                               threshold));
  }
  report.by_lead_time.emplace_back(
      "entire",
      cell_from_distribution(collect_distribution(eval, observations, 0, -1),
                             threshold));

  const auto& target_cols = observations.schema().target_columns();
  for (std::size_t c = 0; c < target_cols.size(); ++c) {
    ErrorDistribution dist =
        collect_distribution(eval, observations, 0, static_cast<int>(c));
    report.by_location.emplace_back(dist.location,
                                    cell_from_distribution(dist, threshold));
  }

  report.overall = report.by_lead_time.back().second;
  return report;
}

std::vector<RawError> raw_errors(const EvalSet& eval,
                                 const TimeSeriesFrame& observations) {
  check_alignment(eval, observations);
  const std::size_t batch = eval.predictions_feet.extent(0);
  const std::size_t k = eval.predictions_feet.extent(1);
  const std::size_t n_t = eval.predictions_feet.extent(2);
  const auto& target_cols = observations.schema().target_columns();
  std::vector<RawError> rows;
  rows.reserve(batch * k * n_t);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t row = eval.anchor_rows[b];
    for (std::size_t j = 1; j <= k; ++j)
      for (std::size_t c = 0; c < n_t; ++c) {
        RawError e;
        e.location = location_of(observations.schema().at(target_cols[c]).name);
        e.lead_time = static_cast<int>(j);
        e.timestamp = observations.stamp_at(row + j);
        e.observed = observations.values()(idx(row + j), idx(target_cols[c]));
        e.predicted = eval.predictions_feet[(b * k + (j - 1)) * n_t + c];
        rows.push_back(std::move(e));
      }
  }
  return rows;
}

void write_raw_errors_csv(const std::vector<RawError>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write raw errors: " + path);
  out << "location,lead_time,timestamp,observed,predicted,error\n";
  char buf[160];
  for (const RawError& e : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%.17g,%.17g,%.17g\n",
                  e.location.c_str(), e.lead_time, format_hour(e.timestamp).c_str(),
                  e.observed, e.predicted, e.predicted - e.observed);
    out << buf;
  }
}

TimeSeriesFrame load_external_predictions(const std::string& path) {
  FeatureSchema schema({
      {"WS_S1", "ft", FeatureRole::Target, false},
      {"TWS_S25A", "ft", FeatureRole::Target, false},
      {"TWS_S25B", "ft", FeatureRole::Target, false},
      {"TWS_S26", "ft", FeatureRole::Target, false},
  });
  return load_frame(path, schema);
}

MetricsReport compare_external(const TimeSeriesFrame& external,
                               const TimeSeriesFrame& observations,
                               const std::vector<int>& lead_slices,
                               double threshold) {
  const HourStamp begin = std::max(external.start(), observations.start());
  const HourStamp end = std::min(external.stamp_at(external.length() - 1),
                                 observations.stamp_at(observations.length() - 1));
  if (begin > end)
    throw ArgumentError("external predictions do not overlap the observations");
  const std::size_t n = static_cast<std::size_t>(end - begin) + 1;

  const auto& obs_targets = observations.schema().target_columns();
  MetricsReport report;
  report.threshold = threshold;

  std::vector<double> all_obs, all_pred;
  std::vector<std::pair<std::string, MetricsCell>> by_loc;
  for (std::size_t c = 0; c < obs_targets.size(); ++c) {
    const std::string& feat = observations.schema().at(obs_targets[c]).name;
    const std::size_t ext_col = external.schema().index_of(feat);  // SchemaError if absent
    ErrorDistribution dist;
    dist.observed.resize(idx(n));
    dist.predicted.resize(idx(n));
    for (std::size_t i = 0; i < n; ++i) {
      const HourStamp stamp = begin + static_cast<HourStamp>(i);
      dist.observed[idx(i)] = observations.values()(
          idx(static_cast<std::size_t>(observations.row_of(stamp))),
          idx(obs_targets[c]));
      dist.predicted[idx(i)] = external.values()(
          idx(static_cast<std::size_t>(external.row_of(stamp))), idx(ext_col));
      all_obs.push_back(dist.observed[idx(i)]);
      all_pred.push_back(dist.predicted[idx(i)]);
    }
    dist.location = location_of(feat);
    by_loc.emplace_back(dist.location, cell_from_distribution(dist, threshold));
  }

  ErrorDistribution pooled;
  pooled.observed = Eigen::Map<Eigen::VectorXd>(all_obs.data(), idx(all_obs.size()));
  pooled.predicted = Eigen::Map<Eigen::VectorXd>(all_pred.data(), idx(all_pred.size()));
  const MetricsCell pooled_cell = cell_from_distribution(pooled, threshold);

  // A simulation driven by boundary conditions has no forecast horizon, so
  // every lead-time slice carries the same pooled values.
  for (int lead : lead_slices)
    report.by_lead_time.emplace_back("t+" + std::to_string(lead), pooled_cell);
  report.by_lead_time.emplace_back("entire", pooled_cell);
  report.by_location = std::move(by_loc);
  report.overall = pooled_cell;
  return report;
}

TimingResult time_inference(SurrogateModel& model,
                            const std::vector<WindowSample>& test,
                            std::size_t repeats) {
  TimingResult result;
  result.samples = test.size();
  if (test.empty()) {
    result.undefined = true;
    return result;
  }
  if (repeats < 3) repeats = 3;
  std::vector<double> times;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    Tensor out = model.predict(test);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  result.seconds = times[times.size() / 2];
  result.samples_per_second = static_cast<double>(test.size()) / result.seconds;
  return result;
}

json MetricsReport::to_json() const {
  json j;
  j["threshold_ft"] = threshold;
  json leads = json::array();
  for (const auto& [label, cell] : by_lead_time) {
    json e = cell_to_json(cell);
    e["slice"] = label;
    leads.push_back(std::move(e));
  }
  j["by_lead_time"] = std::move(leads);
  json locs = json::array();
  for (const auto& [label, cell] : by_location) {
    json e = cell_to_json(cell);
    e["location"] = label;
    locs.push_back(std::move(e));
  }
  j["by_location"] = std::move(locs);
  j["overall"] = cell_to_json(overall);
  return j;
}

}  // namespace stagecast
