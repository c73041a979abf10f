#pragma once

#include <json.hpp>

#include "stagecast/model.hpp"

namespace stagecast {

nlohmann::json spec_to_json(const ArchitectureSpec& spec);
ArchitectureSpec spec_from_json(const nlohmann::json& j);

nlohmann::json normalizer_to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

/// Self-describing container: format tag, architecture spec, build seed,
/// normalizer statistics, and every parameter tensor.
void save_checkpoint(SurrogateModel& model, const std::string& path);
SurrogateModel load_checkpoint(const std::string& path);

}  // namespace stagecast
