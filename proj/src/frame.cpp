#include "stagecast/frame.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stagecast {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) -
         719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

HourStamp parse_hour(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  char sep = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d", &y, &mo, &d, &sep, &h, &mi) < 5 ||
      (sep != ' ' && sep != 'T'))
    throw DataError("cannot parse timestamp: '" + text + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23)
    throw DataError("timestamp out of range: '" + text + "'");
  return days_from_civil(y, mo, d) * 24 + h;
}

std::string format_hour(HourStamp stamp) {
  std::int64_t days = stamp / 24;
  int h = static_cast<int>(stamp % 24);
  if (h < 0) {
    h += 24;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:00", y, m, d, h);
  return buf;
}

FeatureSchema::FeatureSchema(std::vector<Feature> features)
    : features_(std::move(features)) {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].role == FeatureRole::Target) target_cols_.push_back(i);
    if (features_[i].role == FeatureRole::FutureKnown) future_cols_.push_back(i);
  }
}

FeatureSchema FeatureSchema::station_default() {
  return FeatureSchema({
      {"Flow_S26", "cfs", FeatureRole::FutureKnown, true},
      {"Pump_S26", "cfs", FeatureRole::FutureKnown, true},
      {"TWS_S26", "ft", FeatureRole::Target, false},
      {"Flow_S25A", "cfs", FeatureRole::FutureKnown, true},
      {"TWS_S25A", "ft", FeatureRole::Target, false},
      {"Flow_S25B", "cfs", FeatureRole::FutureKnown, true},
      {"Pump_S25B", "cfs", FeatureRole::FutureKnown, true},
      {"TWS_S25B", "ft", FeatureRole::Target, false},
      {"WS_S1", "ft", FeatureRole::Target, false},
      {"WS_S4", "ft", FeatureRole::FutureKnown, false},
      {"Grid_Rainfall", "in/hr", FeatureRole::FutureKnown, true},
  });
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  throw SchemaError("schema has no feature named '" + name + "'");
}

bool FeatureSchema::has(const std::string& name) const {
  for (const Feature& f : features_)
    if (f.name == name) return true;
  return false;
}

TimeSeriesFrame::TimeSeriesFrame(HourStamp start, RowMatrix values,
                                 FeatureSchema schema)
    : start_(start), values_(std::move(values)), schema_(std::move(schema)) {
  if (static_cast<std::size_t>(values_.cols()) != schema_.size())
    throw SchemaError("frame has " + std::to_string(values_.cols()) +
                      " columns, schema expects " + std::to_string(schema_.size()));
}

std::ptrdiff_t TimeSeriesFrame::row_of(HourStamp stamp) const {
  const std::int64_t off = stamp - start_;
  if (off < 0 || off >= static_cast<std::int64_t>(length())) return -1;
  return static_cast<std::ptrdiff_t>(off);
}

TimeSeriesFrame load_frame(const std::string& path, const FeatureSchema& schema,
                           std::size_t max_gap_hours,
                           std::size_t* interpolated_rows) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  std::size_t ts_col = header.size();
  std::vector<std::size_t> col_of_feature(schema.size(), header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "timestamp") ts_col = c;
    for (std::size_t f = 0; f < schema.size(); ++f)
      if (header[c] == schema.at(f).name) col_of_feature[f] = c;
  }
  if (ts_col == header.size()) throw SchemaError(path + ": missing column 'timestamp'");
  for (std::size_t f = 0; f < schema.size(); ++f)
    if (col_of_feature[f] == header.size())
      throw SchemaError(path + ": missing column '" + schema.at(f).name + "'");

  std::vector<HourStamp> stamps;
  std::vector<Eigen::VectorXd> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    stamps.push_back(parse_hour(cells[ts_col]));
    Eigen::VectorXd row(idx(schema.size()));
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const std::string& cell = cells[col_of_feature[f]];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw DataError(path + ":" + std::to_string(lineno) + ": bad value '" +
                        cell + "' in column " + schema.at(f).name);
      row[idx(f)] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  for (std::size_t i = 1; i < stamps.size(); ++i)
    if (stamps[i] <= stamps[i - 1])
      throw DataError(path + ": timestamps not strictly increasing at " +
                      format_hour(stamps[i]));

  const std::size_t total =
      static_cast<std::size_t>(stamps.back() - stamps.front()) + 1;
  RowMatrix values(idx(total), idx(schema.size()));
  std::size_t filled = 0;
  std::size_t out_row = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      const std::size_t gap = static_cast<std::size_t>(stamps[i] - stamps[i - 1]) - 1;
      if (gap > max_gap_hours)
        throw DataError(path + ": gap of " + std::to_string(gap) +
                        " hours between " + format_hour(stamps[i - 1]) + " and " +
                        format_hour(stamps[i]) + " exceeds the " +
                        std::to_string(max_gap_hours) + "-hour interpolation limit");
      for (std::size_t g = 1; g <= gap; ++g) {
        const double t = static_cast<double>(g) / static_cast<double>(gap + 1);
        values.row(idx(out_row)) =
            (1.0 - t) * rows[i - 1].transpose() + t * rows[i].transpose();
        ++out_row;
        ++filled;
      }
    }
    values.row(idx(out_row)) = rows[i].transpose();
    ++out_row;
  }
  if (interpolated_rows) *interpolated_rows = filled;
  return TimeSeriesFrame(stamps.front(), std::move(values), schema);
}

DatasetSplit split_by_date(const TimeSeriesFrame& frame, HourStamp boundary) {
  const HourStamp first = frame.start();
  const HourStamp last = frame.stamp_at(frame.length() - 1);
  if (boundary <= first || boundary > last)
    throw ArgumentError("split boundary " + format_hour(boundary) +
                        " is outside the frame span " + format_hour(first) + " .. " +
                        format_hour(last));
  const std::size_t n_train = static_cast<std::size_t>(boundary - first);
  const std::size_t n_test = frame.length() - n_train;
  DatasetSplit split;
  split.boundary = boundary;
  split.train = TimeSeriesFrame(first, frame.values().topRows(idx(n_train)),
                                frame.schema());
  split.test = TimeSeriesFrame(boundary, frame.values().bottomRows(idx(n_test)),
                               frame.schema());
  return split;
}

Normalizer Normalizer::fit(const TimeSeriesFrame& train) {
  if (train.length() == 0) throw ArgumentError("cannot fit normalizer on empty frame");
  Normalizer n;
  const RowMatrix& v = train.values();
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    n.mins_.push_back(v.col(c).minCoeff());
    n.maxs_.push_back(v.col(c).maxCoeff());
    n.degenerate_.push_back(n.mins_.back() == n.maxs_.back());
  }
  return n;
}

void Normalizer::set_stats(std::vector<double> mins, std::vector<double> maxs) {
  if (mins.size() != maxs.size())
    throw ArgumentError("normalizer min/max length mismatch");
  mins_ = std::move(mins);
  maxs_ = std::move(maxs);
  degenerate_.clear();
  for (std::size_t i = 0; i < mins_.size(); ++i) {
    if (mins_[i] > maxs_[i])
      throw ArgumentError("normalizer has min > max for feature " + std::to_string(i));
    degenerate_.push_back(mins_[i] == maxs_[i]);
  }
}

double Normalizer::apply_value(std::size_t col, double x) const {
  if (degenerate_.at(col)) return 0.0;
  return (x - mins_[col]) / (maxs_[col] - mins_[col]);
}

double Normalizer::invert_value(std::size_t col, double x) const {
  if (degenerate_.at(col))
    throw NumericError("cannot invert degenerate (constant-in-training) feature " +
                       std::to_string(col));
  return x * (maxs_[col] - mins_[col]) + mins_[col];
}

TimeSeriesFrame Normalizer::apply(const TimeSeriesFrame& frame) const {
  if (frame.schema().size() != size())
    throw SchemaError("normalizer fitted on " + std::to_string(size()) +
                      " features, frame has " + std::to_string(frame.schema().size()));
  RowMatrix v = frame.values();
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const std::size_t col = static_cast<std::size_t>(c);
    if (degenerate_[col])
      v.col(c).setZero();
    else
      v.col(c) = (v.col(c).array() - mins_[col]) / (maxs_[col] - mins_[col]);
  }
  return TimeSeriesFrame(frame.start(), std::move(v), frame.schema());
}

TimeSeriesFrame Normalizer::invert(const TimeSeriesFrame& frame) const {
  if (frame.schema().size() != size())
    throw SchemaError("normalizer fitted on " + std::to_string(size()) +
                      " features, frame has " + std::to_string(frame.schema().size()));
  RowMatrix v = frame.values();
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const std::size_t col = static_cast<std::size_t>(c);
    if (degenerate_[col])
      throw NumericError("cannot invert degenerate (constant-in-training) feature " +
                         frame.schema().at(col).name);
    v.col(c) = v.col(c).array() * (maxs_[col] - mins_[col]) + mins_[col];
  }
  return TimeSeriesFrame(frame.start(), std::move(v), frame.schema());
}

}  // namespace stagecast
