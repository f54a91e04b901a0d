#pragma once

#include <string>

#include "cfg/engine.hpp"
#include "json.hpp"

namespace cfg {

using Json = nlohmann::json;

/// Parses a run config. Unknown keys, missing required keys and wrong types
/// raise ConfigError with the dotted field path.
RunConfig config_from_json(const Json& j);

/// Canonical serialization; config_from_json(config_to_json(c)) reproduces c.
Json config_to_json(const RunConfig& config);

/// Reads and parses a JSON document from disk (ConfigError on syntax errors).
Json load_json_file(const std::string& path);

/// Applies "a.b=value" to the raw document. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(Json& j, const std::string& assignment);

}  // namespace cfg
