#include "xcosw/cli.hpp"

#include "xcosw/compiler.hpp"
#include "xcosw/error.hpp"
#include "xcosw/export.hpp"
#include "xcosw/interchange_json.hpp"
#include "xcosw/service.hpp"
#include "xcosw/solver.hpp"
#include "xcosw/xcos_xml.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace xcosw {

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "cannot read '" + path + "'");
  return ss.str();
}

void write_file(const std::string &path, const std::string &data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  out << data;
  out.flush();
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
}

bool looks_like_json(std::string_view text) {
  auto it = std::find_if(text.begin(), text.end(), [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
  return it != text.end() && *it == '{';
}

Diagram load_diagram(const std::string &path) {
  const std::string text = read_file(path);
  return looks_like_json(text) ? from_interchange_json(text) : parse_xcos_xml(text);
}

void emit(const std::string &data, const std::string &out_path, std::ostream &out) {
  if (out_path.empty() || out_path == "-")
    out << data;
  else
    write_file(out_path, data);
}

std::string static_dir_default() {
  if (const char *env = std::getenv("XCOSW_STATIC_DIR")) return env;
  std::error_code ec;
  if (std::filesystem::is_directory("editor/dist", ec)) return "editor/dist";
  return {};
}

int port_default() {
  if (const char *env = std::getenv("XCOSW_PORT")) {
    try {
      return std::stoi(env);
    } catch (const std::exception &) {
    }
  }
  return 8080;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Block-diagram modelling and simulation workbench"};
  app.name(args.empty() ? "xcosw" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);

  std::string file;
  std::string out_path;

  auto *validate_cmd = app.add_subcommand("validate", "Check a diagram and print diagnostics");
  validate_cmd->add_option("file", file, "Diagram (.xcos XML or interchange JSON)")->required();

  std::optional<double> t0, tf, dt, rtol, atol, max_step;
  std::string solver_name;
  std::string format = "csv";
  auto *sim_cmd = app.add_subcommand("simulate", "Run a diagram and write probe traces");
  sim_cmd->add_option("file", file, "Diagram (.xcos XML or interchange JSON)")->required();
  sim_cmd->add_option("--t0", t0, "Start time");
  sim_cmd->add_option("--tf", tf, "Final time");
  sim_cmd->add_option("--solver", solver_name, "rk4 or adaptive")->check(CLI::IsMember({"rk4", "adaptive"}));
  sim_cmd->add_option("--dt", dt, "Fixed step size");
  sim_cmd->add_option("--rtol", rtol, "Relative tolerance");
  sim_cmd->add_option("--atol", atol, "Absolute tolerance");
  sim_cmd->add_option("--max-step", max_step, "Largest adaptive step");
  sim_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  std::string to = "json";
  auto *convert_cmd = app.add_subcommand("convert", "Convert between XML and interchange JSON");
  convert_cmd->add_option("file", file, "Input diagram")->required();
  convert_cmd->add_option("--to", to, "xml or json")->check(CLI::IsMember({"xml", "json"}));
  convert_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");

  auto *blocks_cmd = app.add_subcommand("blocks", "List the block palette as JSON");

  int port = port_default();
  std::size_t jobs = 0;
  std::string host = "0.0.0.0";
  auto *serve_cmd = app.add_subcommand("serve", "Serve the HTTP API and editor");
  serve_cmd->add_option("--port", port, "Listening port (XCOSW_PORT)");
  serve_cmd->add_option("--host", host, "Listening address");
  serve_cmd->add_option("--jobs", jobs, "Worker threads (0 = hardware threads)");

  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();
  try {
    app.parse(rest);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*blocks_cmd) {
      out << palette_to_json().dump(2) << '\n';
      return kExitOk;
    }

    if (*serve_cmd) {
      ServiceConfig config;
      config.jobs = jobs;
      config.static_dir = static_dir_default();
      Server server(config);
      if (!server.bind(host, port)) {
        err << "cannot listen on " << host << ':' << port << '\n';
        return kExitInput;
      }
      out << "listening on http://" << host << ':' << port << std::endl;
      server.listen_after_bind();
      return kExitOk;
    }

    const Diagram diagram = load_diagram(file);

    if (*convert_cmd) {
      emit(to == "xml" ? serialize_xcos_xml(diagram) : to_interchange_json(diagram), out_path, out);
      return kExitOk;
    }

    const auto diagnostics = validate(diagram);
    if (*validate_cmd) {
      for (const auto &d : diagnostics) out << format_diagnostic(d) << '\n';
      if (diagnostics.empty()) out << "ok\n";
      return has_errors(diagnostics) ? kExitInvalid : kExitOk;
    }

    for (const auto &d : diagnostics) err << format_diagnostic(d) << '\n';
    if (has_errors(diagnostics)) return kExitInvalid;

    SimOptions opts = diagram.settings;
    if (t0) opts.t0 = *t0;
    if (tf) opts.tf = *tf;
    if (dt) opts.dt = *dt;
    if (rtol) opts.rtol = *rtol;
    if (atol) opts.atol = *atol;
    if (max_step) opts.max_step = *max_step;
    if (!solver_name.empty()) opts.solver = *parse_solver_kind(solver_name);
    validate_options(opts);

    const SimulationResult result = simulate(compile(diagram), opts);
    emit(format == "json" ? result_to_json(result).dump(2) + "\n" : export_csv(result), out_path, out);
    return kExitOk;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
    case Errc::NonFinite:
    case Errc::StepUnderflow:
    case Errc::Timeout:
      return kExitSimulation;
    case Errc::NotValidated:
      return kExitInvalid;
    default:
      return kExitInput;
    }
  }
}

} // namespace xcosw
