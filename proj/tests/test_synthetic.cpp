#include <doctest.h>

#include <cstdio>
#include <string>

#include "stagecast/synthetic.hpp"

using namespace stagecast;

TEST_CASE("synthetic frame has the station schema and geometry") {
  TimeSeriesFrame f = generate_station_frame(500, 1, parse_hour("2019-03-01 00:00"));
  CHECK(f.length() == 500);
  CHECK(f.schema().size() == FeatureSchema::station_default().size());
  CHECK(f.start() == parse_hour("2019-03-01 00:00"));
  CHECK(f.stamp_at(499) == f.start() + 499);
}

TEST_CASE("synthetic frame is finite and respects physical bounds") {
  TimeSeriesFrame f = generate_station_frame(5000, 77);
  CHECK(f.values().allFinite());
  const FeatureSchema& s = f.schema();
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (!s.at(c).nonnegative) continue;
    CHECK(f.values().col(static_cast<Eigen::Index>(c)).minCoeff() >= 0.0);
  }
  // Stages stay in a plausible band (feet above datum).
  for (const char* name : {"WS_S1", "TWS_S26", "TWS_S25A", "TWS_S25B"}) {
    const auto c = static_cast<Eigen::Index>(s.index_of(name));
    CHECK(f.values().col(c).minCoeff() > -5.0);
    CHECK(f.values().col(c).maxCoeff() < 15.0);
  }
}

TEST_CASE("synthetic frame is seed-deterministic") {
  TimeSeriesFrame a = generate_station_frame(300, 42);
  TimeSeriesFrame b = generate_station_frame(300, 42);
  TimeSeriesFrame c = generate_station_frame(300, 43);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
}

TEST_CASE("synthetic frame has nontrivial variability in every column") {
  TimeSeriesFrame f = generate_station_frame(4000, 5);
  for (std::size_t c = 0; c < f.schema().size(); ++c) {
    const auto col = f.values().col(static_cast<Eigen::Index>(c));
    CHECK(col.maxCoeff() > col.minCoeff());
  }
}

TEST_CASE("written csv loads back through the frame loader") {
  const std::string path = "/tmp/stagecast_synth_roundtrip.csv";
  TimeSeriesFrame f = generate_station_frame(200, 9, parse_hour("2021-06-01 00:00"));
  write_frame_csv(f, path);
  TimeSeriesFrame r = load_frame(path, FeatureSchema::station_default());
  std::remove(path.c_str());
  REQUIRE(r.length() == f.length());
  CHECK(r.start() == f.start());
  // %.10g serialization: agreement to ~1e-9 relative (flows reach ~1e3).
  const double rel = ((r.values() - f.values()).cwiseAbs().array() /
                      (1.0 + f.values().cwiseAbs().array()))
                         .maxCoeff();
  CHECK(rel < 1e-8);
}
