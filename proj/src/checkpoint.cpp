#include "stagecast/checkpoint.hpp"

#include <fstream>

namespace stagecast {

using nlohmann::json;

namespace {
constexpr const char* kFormatTag = "stagecast-checkpoint";
constexpr int kFormatVersion = 1;
}

json spec_to_json(const ArchitectureSpec& spec) {
  json j;
  j["kind"] = model_kind_name(spec.kind);
  j["w"] = spec.w;
  j["k"] = spec.k;
  j["n_features"] = spec.n_features;
  j["n_future"] = spec.n_future;
  j["target_columns"] = spec.target_columns;
  j["future_columns"] = spec.future_columns;
  j["hidden_sizes"] = spec.hidden_sizes;
  j["dropout"] = spec.dropout;
  j["recurrent_hidden"] = spec.recurrent_hidden;
  json blocks = json::array();
  for (const ConvBlockSpec& b : spec.conv_blocks)
    blocks.push_back({{"filters", b.filters},
                      {"width", b.width},
                      {"pool_width", b.pool_width}});
  j["conv_blocks"] = blocks;
  j["ridge_lambda"] = spec.ridge_lambda;
  j["rcnn_stages"] = spec.rcnn_stages;
  return j;
}

ArchitectureSpec spec_from_json(const json& j) {
  ArchitectureSpec spec;
  spec.kind = model_kind_from_name(j.at("kind").get<std::string>());
  spec.w = j.at("w").get<std::size_t>();
  spec.k = j.at("k").get<std::size_t>();
  spec.n_features = j.at("n_features").get<std::size_t>();
  spec.n_future = j.at("n_future").get<std::size_t>();
  spec.target_columns = j.at("target_columns").get<std::vector<std::size_t>>();
  spec.future_columns = j.at("future_columns").get<std::vector<std::size_t>>();
  spec.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
  spec.dropout = j.at("dropout").get<double>();
  spec.recurrent_hidden = j.at("recurrent_hidden").get<std::size_t>();
  spec.conv_blocks.clear();
  for (const json& b : j.at("conv_blocks"))
    spec.conv_blocks.push_back({b.at("filters").get<std::size_t>(),
                                b.at("width").get<std::size_t>(),
                                b.at("pool_width").get<std::size_t>()});
  spec.ridge_lambda = j.at("ridge_lambda").get<double>();
  spec.rcnn_stages = j.at("rcnn_stages").get<std::vector<std::string>>();
  return spec;
}

json normalizer_to_json(const Normalizer& n) {
  json j;
  std::vector<double> mins, maxs;
  for (std::size_t c = 0; c < n.size(); ++c) {
    mins.push_back(n.min_of(c));
    maxs.push_back(n.max_of(c));
  }
  j["min"] = mins;
  j["max"] = maxs;
  return j;
}

Normalizer normalizer_from_json(const json& j) {
  Normalizer n;
  n.set_stats(j.at("min").get<std::vector<double>>(),
              j.at("max").get<std::vector<double>>());
  return n;
}

void save_checkpoint(SurrogateModel& model, const std::string& path) {
  json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["seed"] = model.seed();
  j["spec"] = spec_to_json(model.spec());
  j["normalizer"] = normalizer_to_json(model.normalizer());
  json params = json::array();
  for (Parameter* p : model.parameters()) {
    json e;
    e["name"] = p->name();
    e["shape"] = p->value().shape();
    std::vector<double> data(p->value().raw().data(),
                             p->value().raw().data() + p->value().raw().size());
    e["data"] = data;
    params.push_back(std::move(e));
  }
  j["parameters"] = std::move(params);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
}

SurrogateModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != kFormatTag)
    throw DataError(path + " is not a " + kFormatTag + " file");
  if (j.value("version", 0) != kFormatVersion)
    throw DataError(path + ": unsupported checkpoint version");

  SurrogateModel model(spec_from_json(j.at("spec")),
                       j.at("seed").get<std::uint64_t>());
  model.set_normalizer(normalizer_from_json(j.at("normalizer")));
  std::vector<Parameter*> params = model.parameters();
  const json& stored = j.at("parameters");
  if (stored.size() != params.size())
    throw DataError(path + ": checkpoint holds " + std::to_string(stored.size()) +
                    " parameters, architecture expects " +
                    std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& e = stored[i];
    if (e.at("name").get<std::string>() != params[i]->name())
      throw DataError(path + ": parameter name mismatch at index " +
                      std::to_string(i) + " (" + e.at("name").get<std::string>() +
                      " vs " + params[i]->name() + ")");
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    if (shape != params[i]->value().shape())
      throw DataError(path + ": parameter shape mismatch for " + params[i]->name());
    const auto data = e.at("data").get<std::vector<double>>();
    if (data.size() != params[i]->value().size())
      throw DataError(path + ": parameter data length mismatch for " +
                      params[i]->name());
    for (std::size_t v = 0; v < data.size(); ++v) params[i]->value()[v] = data[v];
  }
  return model;
}

}  // namespace stagecast
