#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "jamflow/trees/ensemble.hpp"

namespace jamflow::trees {

inline constexpr int kModelFormatVersion = 1;

nlohmann::ordered_json config_to_json(TrainConfig const& config);
/// Keys absent from `j` keep their value in `base`. Throws ConfigError on bad types.
TrainConfig config_from_json(nlohmann::json const& j, TrainConfig base = {});

nlohmann::ordered_json model_to_json(Ensemble const& model, std::string const& manifest = {});
Ensemble model_from_json(nlohmann::json const& j);

/// Serialized bytes are a pure function of the model (and manifest name).
std::string serialize_model(Ensemble const& model, std::string const& manifest = {});
void write_model(std::filesystem::path const& path, Ensemble const& model,
                 std::string const& manifest = {});
Ensemble read_model(std::filesystem::path const& path);

}  // namespace jamflow::trees
