#pragma once

#include "xcosw/solver.hpp"

#include <json.hpp>

#include <string>

namespace xcosw {

/// `t` column then one column per probe, shortest round-trip decimals, `\n`
/// line ends. Probe ids containing separators are quoted per RFC 4180.
std::string export_csv(const SimulationResult &result);

/// {"solver", "probes": [ids], "times": [...], "signals": {id: [...]},
///  "steps": {"accepted", "rejected"}}
nlohmann::json result_to_json(const SimulationResult &result);

} // namespace xcosw
