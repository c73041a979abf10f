#include "stagecast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "stagecast/rng.hpp"

namespace stagecast {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Two semidiurnal and one diurnal constituent plus a slow seasonal setup.
double tide_at(double t) {
  return 0.55 * std::sin(2.0 * kPi * t / 12.42) +
         0.25 * std::sin(2.0 * kPi * t / 12.00 + 1.1) +
         0.30 * std::sin(2.0 * kPi * t / 23.93 + 0.4) +
         0.20 * std::sin(2.0 * kPi * t / (365.25 * 24.0) + 2.0);
}

}  // namespace

TimeSeriesFrame generate_station_frame(std::size_t hours, std::uint64_t seed,
                                       HourStamp start) {
  const FeatureSchema schema = FeatureSchema::station_default();
  RowMatrix v(static_cast<Eigen::Index>(hours),
              static_cast<Eigen::Index>(schema.size()));
  Rng rng(seed);

  const std::size_t c_flow26 = schema.index_of("Flow_S26");
  const std::size_t c_pump26 = schema.index_of("Pump_S26");
  const std::size_t c_tws26 = schema.index_of("TWS_S26");
  const std::size_t c_flow25a = schema.index_of("Flow_S25A");
  const std::size_t c_tws25a = schema.index_of("TWS_S25A");
  const std::size_t c_flow25b = schema.index_of("Flow_S25B");
  const std::size_t c_pump25b = schema.index_of("Pump_S25B");
  const std::size_t c_tws25b = schema.index_of("TWS_S25B");
  const std::size_t c_ws1 = schema.index_of("WS_S1");
  const std::size_t c_ws4 = schema.index_of("WS_S4");
  const std::size_t c_rain = schema.index_of("Grid_Rainfall");

  // Catchment storage (inches of depth), wet/dry rainfall state, and a slow
  // autoregressive groundwater component.
  double storage = 2.0;
  double ground = 0.0;
  bool wet = false;
  double ws1_prev = 2.0;

  for (std::size_t h = 0; h < hours; ++h) {
    const double t = static_cast<double>(start + static_cast<HourStamp>(h));
    const double tide = tide_at(t);

    // Seasonal wet-season forcing (southeast-style: wet mid-year), with
    // bursty convective cells rather than steady drizzle.
    const double season =
        0.5 - 0.45 * std::cos(2.0 * kPi * (t / 24.0) / 365.25);
    const double p_start = 0.015 + 0.060 * season;
    const double p_stop = 0.22;
    if (!wet && rng.next_uniform() < p_start) wet = true;
    else if (wet && rng.next_uniform() < p_stop) wet = false;
    double rain = 0.0;
    if (wet) {
      rain = -(0.10 + 0.35 * season) * std::log(1.0 - rng.next_uniform());
      if (rain > 4.0) rain = 4.0;
    }

    // Slow groundwater head; stages see it through a saturating exchange, so
    // its influence flattens out at both extremes.
    ground = 0.997 * ground + 0.010 * rng.next_gaussian();
    const double gw = std::tanh(1.6 * ground);
    storage += 2.5 * rain;

    // Upstream stage: saturating response to storage (the basin crosses the
    // knee of the curve between dry spells and storms), with the response
    // speed itself depending on how full the basin is.
    const double fill = std::clamp((storage - 1.5) / 6.0, 0.0, 1.0);
    const double sat = std::tanh(0.50 * (storage - 3.5));
    const double ws1_level = 1.8 + 2.2 * sat +
                             (0.06 + 0.16 * (1.0 - sat)) * tide + 0.9 * gw +
                             0.40 * std::tanh(1.8 * rain);  // direct runoff splash
    const double a = 0.86 - 0.26 * fill;  // storms propagate fast, recessions slow
    const double ws1 = a * ws1_prev + (1.0 - a) * ws1_level +
                       0.01 * rng.next_gaussian();
    ws1_prev = ws1;

    // Gate releases: threshold openings with a 3/2-power rating curve,
    // choked when the tide is high. Pumps kick in above a higher stage.
    const double head26 = std::max(0.0, ws1 - 2.2 - 0.35 * tide);
    const double head25 = std::max(0.0, ws1 - 2.5 - 0.30 * tide);
    const double flow26 = 900.0 * std::pow(head26, 1.5);
    const double flow25a = 420.0 * std::pow(head25, 1.5);
    const double flow25b = 380.0 * std::pow(std::max(0.0, ws1 - 2.7), 1.5);
    const double pump26 = ws1 > 3.6 ? 350.0 : 0.0;
    const double pump25b = ws1 > 3.9 ? 300.0 : 0.0;

    // Release drains the storage (scaled to inches over the basin), on top
    // of a nonlinear seepage/ET recession.
    storage -= 9e-4 * (flow26 + flow25a + flow25b + pump26 + pump25b);
    if (storage < 0.0) storage = 0.0;
    storage -= 0.004 * std::pow(storage, 1.5);
    if (storage < 0.0) storage = 0.0;

    // Tailwater stages: a modest tidal signal whose amplitude is choked by
    // the discharge jet, a saturating rise from releases, and a share of the
    // upstream storm signal.
    auto tailwater = [&](double base, double flow_total, double gain,
                         double share) {
      const double jet = std::tanh(gain * flow_total);
      const double amp = 0.50 - 0.42 * jet;  // discharge jet chokes the tide
      return base + amp * tide + 1.1 * jet +
             share * (ws1 - 1.8) + 0.45 * gw +
             0.012 * rng.next_gaussian();
    };
    const double tws26 = tailwater(0.30, flow26 + pump26, 1.8e-3, 0.35);
    const double tws25a = tailwater(0.25, flow25a, 2.6e-3, 0.30);
    const double tws25b = tailwater(0.28, flow25b + pump25b, 2.8e-3, 0.32);

    const Eigen::Index r = static_cast<Eigen::Index>(h);
    v(r, static_cast<Eigen::Index>(c_flow26)) = flow26;
    v(r, static_cast<Eigen::Index>(c_pump26)) = pump26;
    v(r, static_cast<Eigen::Index>(c_tws26)) = tws26;
    v(r, static_cast<Eigen::Index>(c_flow25a)) = flow25a;
    v(r, static_cast<Eigen::Index>(c_tws25a)) = tws25a;
    v(r, static_cast<Eigen::Index>(c_flow25b)) = flow25b;
    v(r, static_cast<Eigen::Index>(c_pump25b)) = pump25b;
    v(r, static_cast<Eigen::Index>(c_tws25b)) = tws25b;
    v(r, static_cast<Eigen::Index>(c_ws1)) = ws1;
    v(r, static_cast<Eigen::Index>(c_ws4)) = tide;
    v(r, static_cast<Eigen::Index>(c_rain)) = rain;
  }

  return TimeSeriesFrame(start, std::move(v), schema);
}

void write_frame_csv(const TimeSeriesFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset: " + path);
  out << "timestamp";
  for (const Feature& f : frame.schema().features()) out << "," << f.name;
  out << "\n";
  char buf[32];
  for (std::size_t r = 0; r < frame.length(); ++r) {
    out << format_hour(frame.stamp_at(r));
    for (std::size_t c = 0; c < frame.schema().size(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.10g",
                    frame.values()(static_cast<Eigen::Index>(r),
                                   static_cast<Eigen::Index>(c)));
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace stagecast
