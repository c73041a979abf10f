// stagecast: train/evaluate/perturb/bench/report workflows over the
// surrogate stage-forecasting library. Every run writes a manifest with the
// resolved configuration and a checksum of the input data so results can be
// regenerated from the manifest alone.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stagecast/checkpoint.hpp"
#include "stagecast/report.hpp"
#include "stagecast/synthetic.hpp"
#include "stagecast/trainer.hpp"
#include "stagecast/wilcoxon.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace stagecast;

namespace {

constexpr int kConfigVersion = 1;

// ---------------------------------------------------------------------------
// Run configuration: flat key=value file, every CLI flag overrides the file.

struct RunConfig {
  std::string data;
  std::string boundary;  // split timestamp; empty = 80/20 by record count
  std::string model = "rcnn";
  std::size_t w = 72;
  std::size_t k = 24;
  std::uint64_t seed = 1;
  double threshold = 0.5;
  std::string slices = "table";
  std::vector<double> fractions{0.2};
  std::vector<std::string> noise_features{"WS_S4", "Grid_Rainfall"};
  std::string out;

  // training protocol
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  double validation_fraction = 0.1;
  double clip_norm = 5.0;
  std::size_t train_stride = 1;  // subsample training windows for desk scale

  // architecture knobs (defaults per kind when left empty)
  std::vector<std::size_t> hidden_sizes;
  double dropout = -1.0;  // <0 = architecture default
  std::size_t recurrent_hidden = 0;
  double ridge_lambda = -1.0;

  std::map<std::string, std::string> resolved() const {
    std::map<std::string, std::string> m;
    m["config_version"] = std::to_string(kConfigVersion);
    m["data"] = data;
    m["boundary"] = boundary;
    m["model"] = model;
    m["w"] = std::to_string(w);
    m["k"] = std::to_string(k);
    m["seed"] = std::to_string(seed);
    m["threshold"] = std::to_string(threshold);
    m["slices"] = slices;
    std::string fr;
    for (double f : fractions) fr += (fr.empty() ? "" : ",") + std::to_string(f);
    m["fractions"] = fr;
    std::string nf;
    for (const auto& f : noise_features) nf += (nf.empty() ? "" : ",") + f;
    m["noise_features"] = nf;
    m["out"] = out;
    m["learning_rate"] = std::to_string(learning_rate);
    m["batch_size"] = std::to_string(batch_size);
    m["max_epochs"] = std::to_string(max_epochs);
    m["patience"] = std::to_string(patience);
    m["validation_fraction"] = std::to_string(validation_fraction);
    m["clip_norm"] = std::to_string(clip_norm);
    m["train_stride"] = std::to_string(train_stride);
    return m;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "config_version") {
        if (std::stoi(value) != kConfigVersion)
          throw DataError(path + ": unsupported config_version " + value);
      } else if (key == "data") cfg.data = value;
      else if (key == "boundary") cfg.boundary = value;
      else if (key == "model") cfg.model = value;
      else if (key == "w") cfg.w = std::stoul(value);
      else if (key == "k") cfg.k = std::stoul(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "threshold") cfg.threshold = std::stod(value);
      else if (key == "slices") cfg.slices = value;
      else if (key == "fractions") {
        cfg.fractions.clear();
        for (const auto& f : split_list(value)) cfg.fractions.push_back(std::stod(f));
      } else if (key == "noise_features") cfg.noise_features = split_list(value);
      else if (key == "out") cfg.out = value;
      else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
      else if (key == "batch_size") cfg.batch_size = std::stoul(value);
      else if (key == "max_epochs") cfg.max_epochs = std::stoul(value);
      else if (key == "patience") cfg.patience = std::stoul(value);
      else if (key == "validation_fraction") cfg.validation_fraction = std::stod(value);
      else if (key == "clip_norm") cfg.clip_norm = std::stod(value);
      else if (key == "train_stride") cfg.train_stride = std::stoul(value);
      else if (key == "hidden_sizes") {
        cfg.hidden_sizes.clear();
        for (const auto& h : split_list(value)) cfg.hidden_sizes.push_back(std::stoul(h));
      } else if (key == "dropout") cfg.dropout = std::stod(value);
      else if (key == "recurrent_hidden") cfg.recurrent_hidden = std::stoul(value);
      else if (key == "ridge_lambda") cfg.ridge_lambda = std::stod(value);
      else throw DataError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Manifest plumbing.

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read data file: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  std::string out = cfg.out;
  if (out.empty()) {
    const char* env = std::getenv("STAGECAST_OUT");
    out = env != nullptr ? env : "stagecast_out";
  }
  fs::create_directories(out);
  return out;
}

void write_manifest(const RunConfig& cfg, const fs::path& dir,
                    const std::string& command,
                    const std::vector<std::string>& artifacts) {
  json j;
  j["command"] = command;
  j["config"] = cfg.resolved();
  if (!cfg.data.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_file(cfg.data)));
    j["data_fnv1a"] = buf;
  }
  j["artifacts"] = artifacts;
  std::ofstream out(dir / ("manifest_" + command + ".json"));
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Shared pipeline stages.

struct PreparedData {
  DatasetSplit split;
  Normalizer normalizer;
  std::vector<WindowSample> train_windows;   // normalized, subsampled
  std::vector<WindowSample> test_windows;    // normalized, with w-row context
  TimeSeriesFrame test_context;              // feet; rows cover the test windows
  std::vector<std::size_t> test_anchor_rows; // rows into test_context
};

PreparedData prepare(const RunConfig& cfg, const Normalizer* fixed_normalizer) {
  if (cfg.data.empty()) throw ArgumentError("no data file given (--data or config)");
  const FeatureSchema schema = FeatureSchema::station_default();
  TimeSeriesFrame frame = load_frame(cfg.data, schema);

  HourStamp boundary;
  if (!cfg.boundary.empty()) {
    boundary = parse_hour(cfg.boundary);
  } else {
    boundary = frame.start() + static_cast<HourStamp>(frame.length() * 8 / 10);
  }

  PreparedData prep;
  prep.split = split_by_date(frame, boundary);
  prep.normalizer = fixed_normalizer != nullptr ? *fixed_normalizer
                                                : Normalizer::fit(prep.split.train);

  if (prep.split.train.length() >= cfg.w + cfg.k) {
    auto all = build_windows(prep.normalizer.apply(prep.split.train), cfg.w, cfg.k);
    const std::size_t stride = cfg.train_stride == 0 ? 1 : cfg.train_stride;
    for (std::size_t i = 0; i < all.size(); i += stride)
      prep.train_windows.push_back(std::move(all[i]));
  }

  // Test windows borrow the last w training rows as history context, so the
  // first forecast target is the first test record.
  const std::size_t ctx = std::min<std::size_t>(cfg.w, prep.split.train.length());
  RowMatrix joined(static_cast<Eigen::Index>(ctx + prep.split.test.length()),
                   frame.values().cols());
  joined << prep.split.train.values().bottomRows(static_cast<Eigen::Index>(ctx)),
      prep.split.test.values();
  prep.test_context = TimeSeriesFrame(
      prep.split.test.start() - static_cast<HourStamp>(ctx), std::move(joined),
      schema);
  prep.test_windows =
      build_windows(prep.normalizer.apply(prep.test_context), cfg.w, cfg.k);
  for (std::size_t s = 0; s < prep.test_windows.size(); ++s)
    prep.test_anchor_rows.push_back(cfg.w - 1 + s);
  return prep;
}

ArchitectureSpec spec_from_config(const RunConfig& cfg, const FeatureSchema& schema) {
  ArchitectureSpec spec = ArchitectureSpec::defaults(model_kind_from_name(cfg.model),
                                                     cfg.w, cfg.k, schema);
  if (!cfg.hidden_sizes.empty()) spec.hidden_sizes = cfg.hidden_sizes;
  if (cfg.dropout >= 0.0) spec.dropout = cfg.dropout;
  if (cfg.recurrent_hidden > 0) spec.recurrent_hidden = cfg.recurrent_hidden;
  if (cfg.ridge_lambda >= 0.0) spec.ridge_lambda = cfg.ridge_lambda;
  return spec;
}

EvalSet evaluate_model(SurrogateModel& model, const PreparedData& prep) {
  EvalSet eval;
  eval.anchor_rows = prep.test_anchor_rows;
  Tensor preds = model.predict(prep.test_windows);
  eval.predictions_feet = denormalize_predictions(
      preds, model.normalizer(), prep.test_context.schema().target_columns());
  return eval;
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_train(const RunConfig& cfg, std::string checkpoint_path) {
  const fs::path dir = ensure_out_dir(cfg);
  PreparedData prep = prepare(cfg, nullptr);
  if (prep.train_windows.empty())
    throw DataError("training split is shorter than w + k");

  ArchitectureSpec spec = spec_from_config(cfg, FeatureSchema::station_default());

  TrainingHistory history;
  SurrogateModel model = [&]() {
    if (spec.kind == ModelKind::LinearRegression)
      return fit_linear_regression(prep.train_windows, spec, cfg.seed);
    SurrogateModel m = build_model(spec, cfg.seed);
    if (spec.kind != ModelKind::Persistence) {
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.batch_size;
      tc.max_epochs = cfg.max_epochs;
      tc.patience = cfg.patience;
      tc.validation_fraction = cfg.validation_fraction;
      tc.clip_norm = cfg.clip_norm;
      tc.seed = cfg.seed;
      history = train(m, prep.train_windows, tc);
    }
    return m;
  }();
  model.set_normalizer(prep.normalizer);

  if (checkpoint_path.empty())
    checkpoint_path = (dir / ("checkpoint_" + cfg.model + ".json")).string();
  save_checkpoint(model, checkpoint_path);
  const std::string history_path = (dir / ("history_" + cfg.model + ".csv")).string();
  write_history_csv(history, history_path);
  write_manifest(cfg, dir, "train", {checkpoint_path, history_path});
  std::printf("trained %s: %zu windows, %zu epochs, best val %.6g -> %s\n",
              cfg.model.c_str(), prep.train_windows.size(), history.epochs.size(),
              history.best_val_loss, checkpoint_path.c_str());
  return 0;
}

json wilcoxon_vs_external(const EvalSet& eval, const TimeSeriesFrame& observations,
                          const TimeSeriesFrame& external) {
  // Pair model and external absolute errors at identical (location, timestamp)
  // points, pooling forecast leads; one test per location plus one pooled.
  const auto& target_cols = observations.schema().target_columns();
  const std::size_t k = eval.predictions_feet.extent(1);
  const std::size_t n_t = eval.predictions_feet.extent(2);
  json out = json::object();
  std::vector<double> pooled_a, pooled_b;
  for (std::size_t c = 0; c < n_t; ++c) {
    const std::string feat = observations.schema().at(target_cols[c]).name;
    const std::size_t ext_col = external.schema().index_of(feat);
    std::vector<double> a, b;
    for (std::size_t s = 0; s < eval.anchor_rows.size(); ++s) {
      for (std::size_t j = 1; j <= k; ++j) {
        const std::size_t row = eval.anchor_rows[s] + j;
        const HourStamp stamp = observations.stamp_at(row);
        const std::ptrdiff_t ext_row = external.row_of(stamp);
        if (ext_row < 0) continue;
        const double obs = observations.values()(
            static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(target_cols[c]));
        const double model_err = std::abs(
            eval.predictions_feet[(s * k + (j - 1)) * n_t + c] - obs);
        const double ext_err = std::abs(
            external.values()(static_cast<Eigen::Index>(ext_row),
                              static_cast<Eigen::Index>(ext_col)) -
            obs);
        a.push_back(model_err);
        b.push_back(ext_err);
        pooled_a.push_back(model_err);
        pooled_b.push_back(ext_err);
      }
    }
    if (a.empty()) continue;
    WilcoxonResult r = wilcoxon_signed_rank(
        Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
        Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    std::string loc = feat;
    if (loc.rfind("TWS_", 0) == 0) loc = loc.substr(4);
    else if (loc.rfind("WS_", 0) == 0) loc = loc.substr(3);
    out[loc] = {{"p_value", r.p_value},
                {"statistic", r.statistic},
                {"n_nonzero", r.n_nonzero},
                {"exact", r.exact}};
  }
  if (!pooled_a.empty()) {
    WilcoxonResult r = wilcoxon_signed_rank(
        Eigen::Map<Eigen::VectorXd>(pooled_a.data(),
                                    static_cast<Eigen::Index>(pooled_a.size())),
        Eigen::Map<Eigen::VectorXd>(pooled_b.data(),
                                    static_cast<Eigen::Index>(pooled_b.size())));
    out["pooled"] = {{"p_value", r.p_value},
                     {"statistic", r.statistic},
                     {"n_nonzero", r.n_nonzero},
                     {"exact", r.exact}};
  }
  return out;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                 const std::string& external_path) {
  if (checkpoint_path.empty()) throw ArgumentError("evaluate needs --checkpoint");
  const fs::path dir = ensure_out_dir(cfg);
  SurrogateModel model = load_checkpoint(checkpoint_path);
  if (model.spec().w != cfg.w || model.spec().k != cfg.k)
    throw DataError("checkpoint geometry (w=" + std::to_string(model.spec().w) +
                    ", k=" + std::to_string(model.spec().k) +
                    ") does not match the configured (w=" + std::to_string(cfg.w) +
                    ", k=" + std::to_string(cfg.k) + ")");
  PreparedData prep = prepare(cfg, &model.normalizer());

  EvalSet eval = evaluate_model(model, prep);
  const std::vector<int> slices = lead_slices_preset(cfg.slices);
  std::vector<int> usable;
  for (int s : slices)
    if (static_cast<std::size_t>(s) <= cfg.k) usable.push_back(s);
  MetricsReport report = breakdown(eval, prep.test_context, usable, cfg.threshold);

  json j;
  j["model"] = model_kind_name(model.spec().kind);
  j["checkpoint"] = checkpoint_path;
  j["report"] = report.to_json();

  if (!external_path.empty()) {
    TimeSeriesFrame external = load_external_predictions(external_path);
    MetricsReport ext_report =
        compare_external(external, prep.split.test, usable, cfg.threshold);
    j["external"] = ext_report.to_json();
    j["wilcoxon_vs_external"] =
        wilcoxon_vs_external(eval, prep.test_context, external);
  }

  const std::string report_path = (dir / ("report_" + cfg.model + ".json")).string();
  {
    std::ofstream out(report_path);
    out << j.dump(2) << "\n";
  }
  const std::string raw_path = (dir / ("raw_errors_" + cfg.model + ".csv")).string();
  write_raw_errors_csv(raw_errors(eval, prep.test_context), raw_path);
  write_manifest(cfg, dir, "evaluate", {report_path, raw_path});
  std::printf("evaluated %zu windows; entire-horizon MAE %.4f ft -> %s\n",
              prep.test_windows.size(), report.overall.mae, report_path.c_str());
  return 0;
}

int cmd_perturb(const RunConfig& cfg, const std::string& checkpoint_path) {
  if (checkpoint_path.empty()) throw ArgumentError("perturb needs --checkpoint");
  const fs::path dir = ensure_out_dir(cfg);
  SurrogateModel model = load_checkpoint(checkpoint_path);
  PreparedData prep = prepare(cfg, &model.normalizer());
  const FeatureSchema schema = FeatureSchema::station_default();

  const std::vector<int> slices = lead_slices_preset(cfg.slices);
  std::vector<int> usable;
  for (int s : slices)
    if (static_cast<std::size_t>(s) <= cfg.k) usable.push_back(s);

  EvalSet clean = evaluate_model(model, prep);
  MetricsReport base = breakdown(clean, prep.test_context, usable, cfg.threshold);

  json rows = json::array();
  for (double fraction : cfg.fractions) {
    auto noisy = inject_noise(prep.test_windows, fraction, cfg.noise_features,
                              cfg.seed, schema, model.normalizer());
    EvalSet eval;
    eval.anchor_rows = prep.test_anchor_rows;
    eval.predictions_feet = denormalize_predictions(
        model.predict(noisy), model.normalizer(),
        schema.target_columns());
    MetricsReport rep = breakdown(eval, prep.test_context, usable, cfg.threshold);
    json row;
    row["fraction"] = fraction;
    json changes = json::object();
    for (std::size_t i = 0; i < rep.by_lead_time.size(); ++i) {
      const double before = base.by_lead_time[i].second.mae;
      const double after = rep.by_lead_time[i].second.mae;
      changes[rep.by_lead_time[i].first] =
          before == 0.0 ? 0.0 : 100.0 * (after - before) / before;
    }
    row["mae_change_percent"] = std::move(changes);
    row["mae_entire"] = rep.overall.mae;
    rows.push_back(std::move(row));
  }

  json j;
  j["model"] = model_kind_name(model.spec().kind);
  j["noise_features"] = cfg.noise_features;
  j["seed"] = cfg.seed;
  j["baseline_mae_entire"] = base.overall.mae;
  j["rows"] = std::move(rows);
  const std::string path = (dir / ("perturb_" + cfg.model + ".json")).string();
  {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
  write_manifest(cfg, dir, "perturb", {path});
  std::printf("perturb report -> %s\n", path.c_str());
  return 0;
}

int cmd_bench(const RunConfig& cfg, const std::vector<std::string>& checkpoints,
              double external_seconds) {
  if (checkpoints.empty()) throw ArgumentError("bench needs at least one --checkpoint");
  const fs::path dir = ensure_out_dir(cfg);

  json rows = json::array();
  PreparedData prep;
  bool prepared = false;
  for (const std::string& path : checkpoints) {
    SurrogateModel model = load_checkpoint(path);
    if (!prepared) {
      RunConfig geom = cfg;
      geom.w = model.spec().w;
      geom.k = model.spec().k;
      prep = prepare(geom, &model.normalizer());
      prepared = true;
    }
    TimingResult t = time_inference(model, prep.test_windows);
    json row;
    row["model"] = model_kind_name(model.spec().kind);
    row["checkpoint"] = path;
    row["windows"] = t.samples;
    row["seconds"] = t.seconds;
    row["windows_per_second"] = t.samples_per_second;
    if (external_seconds > 0.0 && !t.undefined)
      row["speedup_vs_external"] = external_seconds / t.seconds;
    rows.push_back(std::move(row));
    std::printf("%s: %zu windows in %.3f s (%.0f/s)\n",
                model_kind_name(model.spec().kind), t.samples, t.seconds,
                t.samples_per_second);
  }
  json j;
  j["external_seconds"] = external_seconds;
  j["rows"] = std::move(rows);
  const std::string path = (dir / "bench.json").string();
  {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
  write_manifest(cfg, dir, "bench", {path});
  std::printf("bench table -> %s\n", path.c_str());
  return 0;
}

// Raw-error CSV rows keyed by (location, lead, timestamp) for pairing.
std::map<std::string, double> read_raw_error_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open raw-error csv: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "location,lead_time,timestamp,observed,predicted,error")
    throw SchemaError(path + ": not a raw-error csv");
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 6) throw DataError(path + ": malformed row: " + line);
    out[f[0] + "|" + f[1] + "|" + f[2]] = std::abs(std::stod(f[5]));
  }
  return out;
}

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& inputs,
               const std::vector<std::string>& labels) {
  if (inputs.size() < 2)
    throw ArgumentError("report needs at least two raw-error csv inputs");
  if (!labels.empty() && labels.size() != inputs.size())
    throw ArgumentError("--labels count must match --inputs");
  const fs::path dir = ensure_out_dir(cfg);

  std::vector<std::map<std::string, double>> errors;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    errors.push_back(read_raw_error_csv(inputs[i]));
    names.push_back(labels.empty() ? fs::path(inputs[i]).stem().string() : labels[i]);
  }

  json matrix = json::object();
  for (std::size_t a = 0; a < errors.size(); ++a) {
    json row = json::object();
    for (std::size_t b = 0; b < errors.size(); ++b) {
      if (a == b) {
        row[names[b]] = nullptr;
        continue;
      }
      std::vector<double> ea, eb;
      for (const auto& [key, va] : errors[a]) {
        auto it = errors[b].find(key);
        if (it != errors[b].end()) {
          ea.push_back(va);
          eb.push_back(it->second);
        }
      }
      if (ea.empty())
        throw DataError("no overlapping samples between " + names[a] + " and " +
                        names[b]);
      WilcoxonResult r = wilcoxon_signed_rank(
          Eigen::Map<Eigen::VectorXd>(ea.data(), static_cast<Eigen::Index>(ea.size())),
          Eigen::Map<Eigen::VectorXd>(eb.data(), static_cast<Eigen::Index>(eb.size())));
      row[names[b]] = r.p_value;
    }
    matrix[names[a]] = std::move(row);
  }
  json j;
  j["models"] = names;
  j["wilcoxon_p_values"] = std::move(matrix);
  const std::string path = (dir / "pvalues.json").string();
  {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
  write_manifest(cfg, dir, "report", {path});
  std::printf("p-value matrix -> %s\n", path.c_str());
  return 0;
}

int cmd_synth(const RunConfig& cfg, std::size_t hours, const std::string& start,
              const std::string& path) {
  TimeSeriesFrame frame = generate_station_frame(
      hours, cfg.seed, start.empty() ? 0 : parse_hour(start));
  write_frame_csv(frame, path);
  std::printf("wrote %zu hourly records -> %s\n", frame.length(), path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surrogate water-stage forecasting workflows"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file, checkpoint, external, start;
  std::vector<std::string> checkpoints, inputs, labels;
  double external_seconds = 2700.0;
  std::size_t synth_hours = 24 * 365;
  std::string synth_path = "station.csv";

  // Flags shared by every subcommand; each overrides the config file.
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "flat key=value config file");
    sub->add_option("--data", cfg.data, "station csv");
    sub->add_option("--boundary", cfg.boundary, "train/test split timestamp");
    sub->add_option("--model", cfg.model, "mlp|rnn|lstm|cnn|rcnn|linear|persistence");
    sub->add_option("--w", cfg.w, "past window, hours");
    sub->add_option("--k", cfg.k, "forecast horizon, hours");
    sub->add_option("--seed", cfg.seed, "global seed");
    sub->add_option("--threshold", cfg.threshold, "extreme-error threshold, feet");
    sub->add_option("--slices", cfg.slices, "lead slice preset: table|figure");
    sub->add_option("--fractions", cfg.fractions, "noise fractions")->delimiter(',');
    sub->add_option("--noise-features", cfg.noise_features, "perturbed covariates")
        ->delimiter(',');
    sub->add_option("--out", cfg.out, "output dir (default $STAGECAST_OUT)");
    sub->add_option("--lr", cfg.learning_rate, "learning rate");
    sub->add_option("--batch", cfg.batch_size, "batch size");
    sub->add_option("--epochs", cfg.max_epochs, "max epochs");
    sub->add_option("--patience", cfg.patience, "early-stop patience");
    sub->add_option("--clip-norm", cfg.clip_norm, "gradient clip (0 = off)");
    sub->add_option("--train-stride", cfg.train_stride, "training window stride");
    return sub;
  };

  CLI::App* s_train = add_common(app.add_subcommand("train", "fit a model"));
  s_train->add_option("--checkpoint", checkpoint, "checkpoint output path");
  CLI::App* s_eval = add_common(app.add_subcommand("evaluate", "metrics report"));
  s_eval->add_option("--checkpoint", checkpoint, "checkpoint to evaluate");
  s_eval->add_option("--external", external, "external prediction csv");
  CLI::App* s_perturb = add_common(app.add_subcommand("perturb", "noise robustness"));
  s_perturb->add_option("--checkpoint", checkpoint, "checkpoint to evaluate");
  CLI::App* s_bench = add_common(app.add_subcommand("bench", "inference timing"));
  s_bench->add_option("--checkpoint", checkpoints, "checkpoints to time")
      ->delimiter(',');
  s_bench->add_option("--external-seconds", external_seconds,
                      "baseline wall time for the speedup column");
  CLI::App* s_report = add_common(app.add_subcommand("report", "cross-model p-values"));
  s_report->add_option("--inputs", inputs, "raw-error csvs")->delimiter(',');
  s_report->add_option("--labels", labels, "model labels")->delimiter(',');
  CLI::App* s_synth = add_common(app.add_subcommand("synth", "synthetic dataset"));
  s_synth->add_option("--hours", synth_hours, "record count");
  s_synth->add_option("--start", start, "first timestamp");
  s_synth->add_option("--path", synth_path, "output csv");

  try {
    // Parse twice: the first pass only locates --config, the second lets the
    // flags override values the file set.
    app.parse(argc, argv);
    if (!config_file.empty()) {
      RunConfig base;
      apply_config_file(base, config_file);
      cfg = base;
      app.clear();
      app.parse(argc, argv);
    }

    if (s_train->parsed()) return cmd_train(cfg, checkpoint);
    if (s_eval->parsed()) return cmd_evaluate(cfg, checkpoint, external);
    if (s_perturb->parsed()) return cmd_perturb(cfg, checkpoint);
    if (s_bench->parsed()) return cmd_bench(cfg, checkpoints, external_seconds);
    if (s_report->parsed()) return cmd_report(cfg, inputs, labels);
    if (s_synth->parsed()) return cmd_synth(cfg, synth_hours, start, synth_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected: %s\n", e.what());
    return 1;
  }
}
