#pragma once

#include "xcosw/diagram.hpp"
#include "xcosw/sim_options.hpp"

#include <json.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

namespace xcosw {

struct ServiceConfig {
  /// Wall-clock budget for one simulation request.
  std::chrono::milliseconds budget{30000};
  /// Worker threads; 0 means one per hardware thread.
  std::size_t jobs = 0;
  /// Directory served at "/" (the editor bundle); empty disables it.
  std::string static_dir;
};

/// HTTP status and JSON body.
struct Reply {
  int status = 200;
  std::string body;
};

/// Body of POST /api/simulate and /api/validate: exactly one of "diagram"
/// (interchange JSON object) or "xml" (document text), plus optional
/// "options" overriding the diagram's settings.
struct SimRequest {
  Diagram diagram;
  SimOptions options;
};

/// Throws SchemaError for malformed requests and the XML parser's errors for
/// bad documents.
SimRequest parse_sim_request(std::string_view body);

/// Palette as served by GET /api/blocks.
nlohmann::json palette_to_json();

Reply handle_simulate(std::string_view body, const ServiceConfig &config = {});
Reply handle_validate(std::string_view body);
Reply handle_blocks();

/// HTTP front end over the handlers above with a bounded worker pool.
class Server {
public:
  explicit Server(ServiceConfig config = {});
  ~Server();
  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  /// Binds an ephemeral port and returns it, or -1.
  int bind_to_any_port(const std::string &host = "127.0.0.1");
  bool bind(const std::string &host, int port);
  /// Serves until stop(); requires a prior bind.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace xcosw
