#include "xcosw/interchange_json.hpp"

#include "xcosw/error.hpp"

#include <algorithm>
#include <initializer_list>
#include <optional>
#include <map>
#include <set>

namespace xcosw {

using nlohmann::json;

namespace {

std::string at(const std::string &path, std::string_view key) { return path + "." + std::string(key); }
std::string at(const std::string &path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

void require_object(const json &j, const std::string &path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
}

void only_keys(const json &j, const std::string &path, std::initializer_list<std::string_view> allowed) {
  for (const auto &[key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw SchemaError(at(path, key), "unknown field");
  }
}

std::string get_string(const json &j, const std::string &path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

double get_number(const json &j, const std::string &path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

std::size_t get_index(const json &j, const std::string &path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    throw SchemaError(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::map<std::string, std::string> get_string_map(const json &j, const std::string &path) {
  require_object(j, path);
  std::map<std::string, std::string> out;
  for (const auto &[key, value] : j.items()) out[key] = get_string(value, at(path, key));
  return out;
}

json string_map(const std::map<std::string, std::string> &m) {
  json out = json::object();
  for (const auto &[k, v] : m) out[k] = v;
  return out;
}

PortRef get_port(const json &j, const std::string &path) {
  require_object(j, path);
  only_keys(j, path, {"block", "port"});
  if (!j.contains("block")) throw SchemaError(at(path, "block"), "missing");
  PortRef p;
  p.block = get_string(j["block"], at(path, "block"));
  p.port = j.contains("port") ? get_index(j["port"], at(path, "port")) : 0;
  return p;
}

json port_json(const PortRef &p) { return json{{"block", p.block}, {"port", p.port}}; }

} // namespace

json options_to_json(const SimOptions &o) {
  json j{{"t0", o.t0},     {"tf", o.tf},     {"solver", std::string(to_string(o.solver))},
         {"dt", o.dt},     {"rtol", o.rtol}, {"atol", o.atol}};
  j["max_step"] = o.max_step ? json(*o.max_step) : json(nullptr);
  return j;
}

SimOptions options_from_json(const json &j, SimOptions o, const std::string &path) {
  require_object(j, path);
  only_keys(j, path, {"t0", "tf", "solver", "dt", "rtol", "atol", "max_step"});
  if (j.contains("t0")) o.t0 = get_number(j["t0"], at(path, "t0"));
  if (j.contains("tf")) o.tf = get_number(j["tf"], at(path, "tf"));
  if (j.contains("dt")) o.dt = get_number(j["dt"], at(path, "dt"));
  if (j.contains("rtol")) o.rtol = get_number(j["rtol"], at(path, "rtol"));
  if (j.contains("atol")) o.atol = get_number(j["atol"], at(path, "atol"));
  if (j.contains("max_step")) {
    if (j["max_step"].is_null()) o.max_step.reset();
    else o.max_step = get_number(j["max_step"], at(path, "max_step"));
  }
  if (j.contains("solver")) {
    const std::string s = get_string(j["solver"], at(path, "solver"));
    auto kind = parse_solver_kind(s);
    if (!kind) throw SchemaError(at(path, "solver"), "expected \"rk4\" or \"adaptive\"");
    o.solver = *kind;
  }
  return o;
}

json diagram_to_json(const Diagram &d) {
  json blocks = json::array();
  for (const auto &b : d.blocks) {
    blocks.push_back({{"id", b.id},
                      {"kind", b.kind},
                      {"params", string_map(b.params)},
                      {"n_in", b.n_in},
                      {"n_out", b.n_out},
                      {"geometry",
                       {{"x", b.geometry.x},
                        {"y", b.geometry.y},
                        {"width", b.geometry.width},
                        {"height", b.geometry.height}}},
                      {"attrs", string_map(b.attrs)}});
  }
  json links = json::array();
  for (const auto &l : d.links) {
    links.push_back({{"id", l.id},
                     {"src", port_json(l.src)},
                     {"dst", port_json(l.dst)},
                     {"attrs", string_map(l.attrs)}});
  }
  return json{{"format", kInterchangeFormat},
              {"title", d.title},
              {"background", d.background},
              {"settings", options_to_json(d.settings)},
              {"attrs", string_map(d.attrs)},
              {"blocks", std::move(blocks)},
              {"links", std::move(links)}};
}

std::string to_interchange_json(const Diagram &d) { return diagram_to_json(d).dump(2) + "\n"; }

Diagram diagram_from_json(const json &j, const std::string &path) {
  require_object(j, path);
  only_keys(j, path, {"format", "title", "background", "settings", "attrs", "blocks", "links"});
  if (j.contains("format")) {
    const auto &f = j["format"];
    if (!f.is_number_integer() || f.get<long long>() != kInterchangeFormat)
      throw SchemaError(at(path, "format"), "unsupported format (expected 1)");
  }

  Diagram d;
  if (j.contains("title")) d.title = get_string(j["title"], at(path, "title"));
  if (j.contains("background")) {
    if (!j["background"].is_number_integer())
      throw SchemaError(at(path, "background"), "expected an integer");
    d.background = j["background"].get<long>();
  }
  if (j.contains("settings")) d.settings = options_from_json(j["settings"], {}, at(path, "settings"));
  if (j.contains("attrs")) d.attrs = get_string_map(j["attrs"], at(path, "attrs"));

  for (const char *key : {"blocks", "links"}) {
    if (!j.contains(key)) throw SchemaError(at(path, key), "missing");
    if (!j[key].is_array()) throw SchemaError(at(path, key), "expected an array");
  }

  std::set<std::string> ids{std::string(kRootCellId), std::string(kDefaultParentId)};
  std::vector<bool> arity_given;
  const json &blocks = j["blocks"];
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string bp = at(at(path, "blocks"), i);
    const json &jb = blocks[i];
    require_object(jb, bp);
    only_keys(jb, bp, {"id", "kind", "params", "n_in", "n_out", "geometry", "attrs"});
    for (const char *key : {"id", "kind"})
      if (!jb.contains(key)) throw SchemaError(at(bp, key), "missing");
    Block b;
    b.id = get_string(jb["id"], at(bp, "id"));
    if (b.id.empty() || !ids.insert(b.id).second)
      throw SchemaError(at(bp, "id"), "id '" + b.id + "' is empty, duplicated or reserved");
    b.kind = get_string(jb["kind"], at(bp, "kind"));
    if (jb.contains("params")) b.params = get_string_map(jb["params"], at(bp, "params"));
    if (jb.contains("attrs")) b.attrs = get_string_map(jb["attrs"], at(bp, "attrs"));
    if (jb.contains("geometry")) {
      const std::string gp = at(bp, "geometry");
      const json &g = jb["geometry"];
      require_object(g, gp);
      only_keys(g, gp, {"x", "y", "width", "height"});
      if (g.contains("x")) b.geometry.x = get_number(g["x"], at(gp, "x"));
      if (g.contains("y")) b.geometry.y = get_number(g["y"], at(gp, "y"));
      if (g.contains("width")) b.geometry.width = get_number(g["width"], at(gp, "width"));
      if (g.contains("height")) b.geometry.height = get_number(g["height"], at(gp, "height"));
    }
    std::optional<std::size_t> n_in, n_out;
    if (jb.contains("n_in")) n_in = get_index(jb["n_in"], at(bp, "n_in"));
    if (jb.contains("n_out")) n_out = get_index(jb["n_out"], at(bp, "n_out"));

    if (const BlockSpec *spec = find_spec(b.kind)) {
      for (const auto &[name, raw] : b.params)
        if (!spec->find_param(name))
          throw SchemaError(at(at(bp, "params"), name), spec->name + " has no such parameter");
      b.params = with_defaults(*spec, b.params);
      const Arity arity = arity_for(*spec, b.params);
      if (n_in && *n_in != arity.n_in)
        throw SchemaError(at(bp, "n_in"), "expected " + std::to_string(arity.n_in) + " for " + spec->name);
      if (n_out && *n_out != arity.n_out)
        throw SchemaError(at(bp, "n_out"), "expected " + std::to_string(arity.n_out) + " for " + spec->name);
      b.n_in = arity.n_in;
      b.n_out = arity.n_out;
    } else {
      b.n_in = n_in.value_or(0);
      b.n_out = n_out.value_or(0);
    }
    arity_given.push_back(n_in.has_value() || n_out.has_value());
    d.blocks.push_back(std::move(b));
  }

  const json &links = j["links"];
  std::set<std::pair<std::string, std::size_t>> driven;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string lp = at(at(path, "links"), i);
    const json &jl = links[i];
    require_object(jl, lp);
    only_keys(jl, lp, {"id", "src", "dst", "attrs"});
    for (const char *key : {"id", "src", "dst"})
      if (!jl.contains(key)) throw SchemaError(at(lp, key), "missing");
    Link l;
    l.id = get_string(jl["id"], at(lp, "id"));
    if (l.id.empty() || !ids.insert(l.id).second)
      throw SchemaError(at(lp, "id"), "id '" + l.id + "' is empty, duplicated or reserved");
    l.src = get_port(jl["src"], at(lp, "src"));
    l.dst = get_port(jl["dst"], at(lp, "dst"));
    if (jl.contains("attrs")) l.attrs = get_string_map(jl["attrs"], at(lp, "attrs"));

    for (auto [end, key] : {std::pair{&l.src, "src"}, std::pair{&l.dst, "dst"}}) {
      Block *b = d.find_block(end->block);
      if (!b) throw SchemaError(at(at(lp, key), "block"), "no block '" + end->block + "'");
      const bool output = std::string_view(key) == "src";
      std::size_t &count = output ? b->n_out : b->n_in;
      const auto bi = static_cast<std::size_t>(b - d.blocks.data());
      if (b->opaque() && !arity_given[bi]) count = std::max(count, end->port + 1);
      if (end->port >= count)
        throw SchemaError(at(at(lp, key), "port"),
                          "block " + b->id + " has no " + (output ? "output" : "input") + " port " +
                              std::to_string(end->port));
    }
    if (!driven.emplace(l.dst.block, l.dst.port).second)
      throw SchemaError(at(lp, "dst"), "input already has a driver");
    d.links.push_back(std::move(l));
  }

  try {
    check_invariants(d);
  } catch (const SchemaError &) {
    throw;
  } catch (const Error &e) {
    throw SchemaError(path, e.what());
  }
  return d;
}

Diagram from_interchange_json(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception &e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  return diagram_from_json(j, "$");
}

} // namespace xcosw
