#pragma once

#include "xcosw/diagram.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace xcosw {

/// Version written to and accepted in the top-level "format" field.
inline constexpr int kInterchangeFormat = 1;

/// Loss-free JSON form of a diagram (schema in docs/interchange.md).
nlohmann::json diagram_to_json(const Diagram &d);
std::string to_interchange_json(const Diagram &d);

/// Throws SchemaError carrying the JSON path of the offending field, for
/// malformed JSON as well as structural violations (unknown keys, wrong
/// types, links to missing blocks, ...).
Diagram diagram_from_json(const nlohmann::json &j, const std::string &path = "$");
Diagram from_interchange_json(std::string_view bytes);

nlohmann::json options_to_json(const SimOptions &opts);
/// Applies the fields present in `j` on top of `base`.
SimOptions options_from_json(const nlohmann::json &j, SimOptions base, const std::string &path);

} // namespace xcosw
