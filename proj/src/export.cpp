#include "xcosw/export.hpp"

#include "xcosw/format.hpp"

namespace xcosw {

namespace {

std::string csv_field(const std::string &text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::string export_csv(const SimulationResult &result) {
  std::string out = "t";
  for (const auto &s : result.signals) out += "," + csv_field(s.id);
  out += '\n';
  for (std::size_t row = 0; row < result.times.size(); ++row) {
    out += format_real(result.times[row]);
    for (const auto &s : result.signals) {
      out += ',';
      out += format_real(s.values[row]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json result_to_json(const SimulationResult &result) {
  nlohmann::json probes = nlohmann::json::array();
  nlohmann::json signals = nlohmann::json::object();
  for (const auto &s : result.signals) {
    probes.push_back(s.id);
    signals[s.id] = s.values;
  }
  return {{"solver", std::string(to_string(result.solver))},
          {"probes", std::move(probes)},
          {"times", result.times},
          {"signals", std::move(signals)},
          {"steps", {{"accepted", result.steps.accepted}, {"rejected", result.steps.rejected}}}};
}

} // namespace xcosw
