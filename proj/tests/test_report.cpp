#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "stagecast/report.hpp"
#include "stagecast/window.hpp"

#include "support/test_util.hpp"

using namespace stagecast;
using namespace stagecast::testutil;

namespace {

// An EvalSet whose predictions equal the observed targets exactly.
EvalSet perfect_eval(const TimeSeriesFrame& frame, std::size_t w, std::size_t k) {
  auto windows = build_windows(frame, w, k);
  EvalSet eval;
  eval.predictions_feet = Tensor(
      {windows.size(), k, frame.schema().target_columns().size()});
  for (std::size_t b = 0; b < windows.size(); ++b) {
    eval.anchor_rows.push_back(w - 1 + b);
    for (std::size_t i = 0; i < windows[b].target.size(); ++i)
      eval.predictions_feet[b * windows[b].target.size() + i] = windows[b].target[i];
  }
  return eval;
}

}  // namespace

TEST_CASE("perfect predictions produce a perfect report") {
  const FeatureSchema schema = toy_schema();
  TimeSeriesFrame frame = synthetic_frame(60, schema, 0);
  EvalSet eval = perfect_eval(frame, 8, 4);
  MetricsReport report = breakdown(eval, frame, {1, 2, 4}, 0.5);
  REQUIRE(report.by_lead_time.size() == 4);  // three slices + "entire"
  CHECK(report.by_lead_time.back().first == "entire");
  REQUIRE(report.by_location.size() == 2);
  CHECK(report.by_location[0].first == "A");   // TWS_A
  CHECK(report.by_location[1].first == "B");   // WS_B
  auto check_cell = [](const MetricsCell& c) {
    CHECK(c.mae == 0.0);
    CHECK(c.rmse == 0.0);
    CHECK(c.nse == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.kge == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.extreme_total == 0.0);
  };
  for (const auto& [label, cell] : report.by_lead_time) check_cell(cell);
  for (const auto& [label, cell] : report.by_location) check_cell(cell);
  check_cell(report.overall);
}

TEST_CASE("lead slice presets") {
  CHECK(lead_slices_preset("table") == std::vector<int>{1, 8, 16, 24});
  CHECK(lead_slices_preset("figure") == std::vector<int>{1, 12, 18, 24});
  CHECK_THROWS_AS(lead_slices_preset("bogus"), ArgumentError);
}

TEST_CASE("breakdown validates slice range and alignment") {
  const FeatureSchema schema = toy_schema();
  TimeSeriesFrame frame = synthetic_frame(60, schema, 0);
  EvalSet eval = perfect_eval(frame, 8, 4);
  CHECK_THROWS_AS(breakdown(eval, frame, {5}, 0.5), ArgumentError);
  CHECK_THROWS_AS(breakdown(eval, frame, {0}, 0.5), ArgumentError);
  eval.anchor_rows.back() = frame.length() - 2;  // window would overrun
  CHECK_THROWS_AS(breakdown(eval, frame, {1}, 0.5), ArgumentError);
}

TEST_CASE("shifting one location moves only that location's mae") {
  const FeatureSchema schema = toy_schema();
  TimeSeriesFrame frame = synthetic_frame(80, schema, 0);
  EvalSet eval = perfect_eval(frame, 8, 4);
  // Shift every prediction of the first target channel (+0.1 ft).
  const std::size_t n_t = 2;
  for (std::size_t i = 0; i < eval.predictions_feet.size(); i += n_t)
    eval.predictions_feet[i] += 0.1;
  MetricsReport report = breakdown(eval, frame, {1, 4}, 0.5);
  CHECK(report.by_location[0].second.mae == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(report.by_location[1].second.mae == 0.0);
  // The pooled cell averages the shifted and clean halves.
  CHECK(report.overall.mae == doctest::Approx(0.05).epsilon(1e-12));
  // Overestimation shows up in the extreme split with a small threshold.
  MetricsReport tight = breakdown(eval, frame, {1}, 0.05);
  CHECK(tight.by_location[0].second.extreme_over ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tight.by_location[0].second.extreme_under == 0.0);
}

TEST_CASE("collect_distribution slices by lead and location") {
  const FeatureSchema schema = toy_schema();
  TimeSeriesFrame frame = synthetic_frame(40, schema, 0);
  EvalSet eval = perfect_eval(frame, 8, 4);
  const std::size_t batch = eval.anchor_rows.size();
  ErrorDistribution one_lead = collect_distribution(eval, frame, 2, -1);
  CHECK(one_lead.size() == batch * 2);  // both locations at one lead
  ErrorDistribution one_loc = collect_distribution(eval, frame, 0, 1);
  CHECK(one_loc.size() == batch * 4);   // all leads at one location
  CHECK(one_loc.location == "B");
  ErrorDistribution single = collect_distribution(eval, frame, 3, 0);
  CHECK(single.size() == batch);
}

TEST_CASE("external comparison is lead-time invariant") {
  FeatureSchema obs_schema = toy_schema();
  TimeSeriesFrame obs = synthetic_frame(100, obs_schema, 0);
  // External series carries only the target stations, on the same clock.
  FeatureSchema ext_schema({
      {"TWS_A", "ft", FeatureRole::Target, false},
      {"WS_B", "ft", FeatureRole::Target, false},
  });
  RowMatrix ext_vals(100, 2);
  for (Eigen::Index r = 0; r < 100; ++r) {
    ext_vals(r, 0) = obs.values()(r, 1);
    ext_vals(r, 1) = obs.values()(r, 2);
  }

  SUBCASE("identical series give a perfect report") {
    TimeSeriesFrame ext(0, ext_vals, ext_schema);
    MetricsReport report = compare_external(ext, obs, {1, 2, 3}, 0.5);
    CHECK(report.overall.mae == 0.0);
    CHECK(report.overall.nse == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant shift appears identically at every slice") {
    TimeSeriesFrame ext(0, ext_vals.array() + 0.186, ext_schema);
    MetricsReport report = compare_external(ext, obs, {1, 2, 3}, 0.5);
    REQUIRE(report.by_lead_time.size() == 4);
    for (const auto& [label, cell] : report.by_lead_time) {
      CHECK(cell.mae == doctest::Approx(0.186).epsilon(1e-12));
      CHECK(cell.rmse == doctest::Approx(0.186).epsilon(1e-12));
    }
    for (std::size_t s = 1; s < report.by_lead_time.size(); ++s) {
      CHECK(report.by_lead_time[s].second.mae == report.by_lead_time[0].second.mae);
      CHECK(report.by_lead_time[s].second.kge == report.by_lead_time[0].second.kge);
    }
    CHECK(report.by_location[0].second.mae == doctest::Approx(0.186).epsilon(1e-12));
  }
  SUBCASE("missing station column") {
    FeatureSchema bad({{"TWS_A", "ft", FeatureRole::Target, false}});
    TimeSeriesFrame ext(0, ext_vals.col(0), bad);
    CHECK_THROWS_AS(compare_external(ext, obs, {1}, 0.5), SchemaError);
  }
  SUBCASE("no overlap") {
    TimeSeriesFrame ext(5000, ext_vals, ext_schema);
    CHECK_THROWS_AS(compare_external(ext, obs, {1}, 0.5), ArgumentError);
  }
}

TEST_CASE("denormalize_predictions inverts the target channels") {
  const FeatureSchema schema = toy_schema();
  Normalizer norm;
  norm.set_stats({0, 2, -1, 0}, {1, 6, 3, 1});
  Tensor pred({1, 2, 2});
  pred[0] = 0.25;  // TWS_A: 2 + 0.25*4 = 3
  pred[1] = 0.5;   // WS_B: -1 + 0.5*4 = 1
  pred[2] = 1.0;   // TWS_A: 6
  pred[3] = 0.0;   // WS_B: -1
  Tensor feet = denormalize_predictions(pred, norm, schema.target_columns());
  CHECK(feet[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(feet[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(feet[2] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(feet[3] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(denormalize_predictions(Tensor({2, 2}), norm,
                                          schema.target_columns()),
                  DimensionError);
}

TEST_CASE("raw error export") {
  const FeatureSchema schema = toy_schema();
  TimeSeriesFrame frame = synthetic_frame(40, schema, parse_hour("2019-01-01 00:00"));
  EvalSet eval = perfect_eval(frame, 8, 4);
  eval.predictions_feet[0] += 0.25;  // one known error
  auto rows = raw_errors(eval, frame);
  REQUIRE(rows.size() == eval.anchor_rows.size() * 4 * 2);
  CHECK(rows[0].location == "A");
  CHECK(rows[0].lead_time == 1);
  CHECK(rows[0].timestamp == frame.stamp_at(8));
  CHECK(rows[0].predicted - rows[0].observed == doctest::Approx(0.25).epsilon(1e-12));

  const auto path = std::filesystem::temp_directory_path() / "stagecast_raw.csv";
  write_raw_errors_csv(rows, path.string());
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  std::filesystem::remove(path);
  CHECK(header == "location,lead_time,timestamp,observed,predicted,error");
  CHECK(first.substr(0, 2) == "A,");
  CHECK(first.find("2019-01-01 08:00") != std::string::npos);
}

TEST_CASE("external prediction csv loader") {
  const HourStamp t0 = parse_hour("2019-06-01 00:00");
  const auto path = std::filesystem::temp_directory_path() / "stagecast_ext.csv";
  {
    std::ofstream out(path);
    out << "timestamp,WS_S1,TWS_S25A,TWS_S25B,TWS_S26\n";
    for (int i = 0; i < 5; ++i)
      out << format_hour(t0 + i) << ",1.1,2.2,3.3,4.4\n";
  }
  TimeSeriesFrame ext = load_external_predictions(path.string());
  std::filesystem::remove(path);
  CHECK(ext.length() == 5);
  CHECK(ext.schema().size() == 4);
  CHECK(ext.values()(0, ext.schema().index_of("TWS_S26")) ==
        doctest::Approx(4.4).epsilon(1e-15));
}

TEST_CASE("inference timing") {
  const FeatureSchema schema = toy_schema();
  SUBCASE("empty test set is flagged undefined") {
    ArchitectureSpec spec = ArchitectureSpec::defaults(ModelKind::Mlp, 8, 2, schema);
    SurrogateModel model = build_model(spec, 1);
    TimingResult t = time_inference(model, {});
    CHECK(t.undefined);
    CHECK(t.samples == 0);
  }
  SUBCASE("median of repeated passes") {
    ArchitectureSpec spec = ArchitectureSpec::defaults(ModelKind::Mlp, 8, 2, schema);
    spec.hidden_sizes = {8};
    SurrogateModel model = build_model(spec, 1);
    auto batch = random_batch(50, 8, 2, schema, 1);
    TimingResult t = time_inference(model, batch, 3);
    CHECK_FALSE(t.undefined);
    CHECK(t.samples == 50);
    CHECK(t.seconds > 0.0);
    CHECK(t.samples_per_second > 0.0);
  }
}
