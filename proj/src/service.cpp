#include "xcosw/service.hpp"

#include "xcosw/compiler.hpp"
#include "xcosw/error.hpp"
#include "xcosw/export.hpp"
#include "xcosw/interchange_json.hpp"
#include "xcosw/palette.hpp"
#include "xcosw/solver.hpp"
#include "xcosw/xcos_xml.hpp"

#include <httplib.h>

#include <thread>

namespace xcosw {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json error_body(const Error &e) {
  return {{"status", "error"}, {"code", errc_name(e.code())}, {"message", e.what()}};
}

Reply bad_request(const Error &e) { return {400, error_body(e).dump()}; }

} // namespace

SimRequest parse_sim_request(std::string_view body) {
  json j;
  try {
    j = json::parse(body.begin(), body.end());
  } catch (const json::exception &e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  for (const auto &[key, value] : j.items())
    if (key != "diagram" && key != "xml" && key != "options") throw SchemaError("$." + key, "unknown field");
  const bool has_json = j.contains("diagram");
  const bool has_xml = j.contains("xml");
  if (has_json == has_xml) throw SchemaError("$", "exactly one of \"diagram\" or \"xml\" is required");

  SimRequest req;
  if (has_json) {
    req.diagram = diagram_from_json(j["diagram"], "$.diagram");
  } else {
    if (!j["xml"].is_string()) throw SchemaError("$.xml", "expected a string");
    req.diagram = parse_xcos_xml(j["xml"].get<std::string>());
  }
  req.options = req.diagram.settings;
  if (j.contains("options")) req.options = options_from_json(j["options"], req.options, "$.options");
  return req;
}

json palette_to_json() {
  json out = json::array();
  for (const auto &spec : palette()) {
    json params = json::array();
    for (const auto &p : spec.params)
      params.push_back({{"name", p.name},
                        {"type", std::string(to_string(p.shape))},
                        {"default", p.default_raw},
                        {"unit", p.unit}});
    json feedthrough = json::array();
    for (bool f : spec.feedthrough) feedthrough.push_back(f);
    out.push_back({{"kind", spec.name},
                   {"label", spec.label},
                   {"n_in", spec.n_in},
                   {"n_out", spec.n_out},
                   {"n_in_from_signs", spec.n_in_from_signs},
                   {"feedthrough", std::move(feedthrough)},
                   {"n_states", spec.n_states},
                   {"discrete", spec.discrete},
                   {"params", std::move(params)}});
  }
  return out;
}

Reply handle_blocks() { return {200, palette_to_json().dump()}; }

Reply handle_validate(std::string_view body) {
  try {
    const SimRequest req = parse_sim_request(body);
    return {200, diagnostics_to_json(validate(req.diagram)).dump()};
  } catch (const Error &e) {
    return bad_request(e);
  }
}

Reply handle_simulate(std::string_view body, const ServiceConfig &config) {
  const auto start = Clock::now();
  SimRequest req;
  try {
    req = parse_sim_request(body);
    validate_options(req.options);
  } catch (const Error &e) {
    return bad_request(e);
  }

  auto diagnostics = validate(req.diagram);
  if (has_errors(diagnostics)) {
    json out{{"status", "invalid"},
             {"code", errc_name(Errc::NotValidated)},
             {"message", "diagram has errors; simulation refused"},
             {"diagnostics", diagnostics_to_json(diagnostics)},
             {"timing_ms", elapsed_ms(start)}};
    return {422, out.dump()};
  }

  try {
    const CompiledSystem sys = compile(req.diagram);
    RunControl control;
    control.deadline = start + config.budget;
    const SimulationResult result = simulate(sys, req.options, control);
    json out{{"status", "ok"},
             {"diagnostics", diagnostics_to_json(diagnostics)},
             {"result", result_to_json(result)},
             {"timing_ms", elapsed_ms(start)}};
    return {200, out.dump()};
  } catch (const Error &e) {
    json out = error_body(e);
    out["timing_ms"] = elapsed_ms(start);
    return {e.code() == Errc::Timeout ? 408 : 422, out.dump()};
  }
}

struct Server::Impl {
  ServiceConfig config;
  httplib::Server http;
};

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  std::size_t jobs = impl_->config.jobs;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  impl_->http.new_task_queue = [jobs] { return new httplib::ThreadPool(jobs); };
  impl_->http.set_payload_max_length(16u << 20);

  auto send = [](httplib::Response &res, const Reply &reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  const ServiceConfig *cfg = &impl_->config;
  impl_->http.Post("/api/simulate", [send, cfg](const httplib::Request &req, httplib::Response &res) {
    send(res, handle_simulate(req.body, *cfg));
  });
  impl_->http.Post("/api/validate", [send](const httplib::Request &req, httplib::Response &res) {
    send(res, handle_validate(req.body));
  });
  impl_->http.Get("/api/blocks", [send](const httplib::Request &, httplib::Response &res) {
    send(res, handle_blocks());
  });
  if (!impl_->config.static_dir.empty()) impl_->http.set_mount_point("/", impl_->config.static_dir);
}

Server::~Server() { stop(); }

int Server::bind_to_any_port(const std::string &host) { return impl_->http.bind_to_any_port(host); }

bool Server::bind(const std::string &host, int port) { return impl_->http.bind_to_port(host, port); }

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

} // namespace xcosw
