#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace newsrank {

// Validates `instance` against a JSON schema using the keywords type, enum,
// const, required, properties, additionalProperties, items, minItems,
// minimum, maximum, anyOf and $ref to "#/definitions/...". Returns one
// message per violation, empty when valid.
std::vector<std::string> validate_schema(const nlohmann::json& schema, const nlohmann::json& instance);

// The published report schema, compiled into the library.
const nlohmann::json& report_schema();

} // namespace newsrank
