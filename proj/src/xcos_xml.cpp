#include "xcosw/xcos_xml.hpp"

#include "xcosw/error.hpp"
#include "xcosw/format.hpp"
#include "xml_dom.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <optional>

namespace xcosw {

using detail::XmlElement;

namespace {

using AttrList = std::vector<std::pair<std::string, std::string>>;

constexpr std::string_view kFinalTime = "finalIntegrationTime";
constexpr std::string_view kAbsTol = "integratorAbsoluteTolerance";
constexpr std::string_view kRelTol = "integratorRelativeTolerance";
constexpr std::string_view kMaxStep = "maximumStepSize";
constexpr std::string_view kStartTime = "initialIntegrationTime";
constexpr std::string_view kSolverKind = "solverKind";
constexpr std::string_view kFixedStep = "fixedStepSize";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

double real_attr(std::string_view owner, std::string_view key, const std::string &value) {
  auto v = parse_real(value);
  if (!v)
    throw Error(Errc::XmlSyntax, std::string(owner) + ": attribute " + std::string(key) + "=\"" +
                                     value + "\" is not a number");
  return *v;
}

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

enum class CellType { Plain, Block, Link, InputPort, OutputPort, EventPort };

CellType classify(const XmlElement &el) {
  if (el.attr("interfaceFunctionName")) return CellType::Block;
  if (ends_with(el.name, "Link")) return CellType::Link;
  if (ends_with(el.name, "InputPort")) return CellType::InputPort;
  if (ends_with(el.name, "OutputPort")) return CellType::OutputPort;
  if (el.name == "ControlPort" || el.name == "CommandPort") return CellType::EventPort;
  return CellType::Plain;
}

struct Cell {
  const XmlElement *el;
  CellType type;
  std::optional<std::string> parent;
};

struct PortCell {
  std::string block;
  std::size_t index; // 0-based
  CellType type;
};

void read_settings(const XmlElement &root, Diagram &d) {
  for (const auto &[key, value] : root.attrs) {
    if (key == "background") {
      auto v = parse_int<long>(value);
      if (!v) throw Error(Errc::XmlSyntax, "XcosDiagram: background=\"" + value + "\" is not an integer");
      d.background = *v;
    } else if (key == "title") {
      d.title = value;
    } else if (key == kFinalTime) {
      d.settings.tf = real_attr("XcosDiagram", key, value);
    } else if (key == kAbsTol) {
      d.settings.atol = real_attr("XcosDiagram", key, value);
    } else if (key == kRelTol) {
      d.settings.rtol = real_attr("XcosDiagram", key, value);
    } else if (key == kMaxStep) {
      d.settings.max_step = real_attr("XcosDiagram", key, value);
    } else if (key == kStartTime) {
      d.settings.t0 = real_attr("XcosDiagram", key, value);
    } else if (key == kFixedStep) {
      d.settings.dt = real_attr("XcosDiagram", key, value);
    } else if (key == kSolverKind) {
      auto kind = parse_solver_kind(value);
      if (!kind) throw Error(Errc::XmlSyntax, "XcosDiagram: unknown solverKind \"" + value + "\"");
      d.settings.solver = *kind;
    } else {
      d.attrs[key] = value;
    }
  }
}

ParamMap read_params(const XmlElement &el, const BlockSpec *spec) {
  ParamMap params;
  for (const auto &child : el.children) {
    const std::string *as = child.attr("as");
    if (child.name != "ScilabString" || !as || *as != "exprs") continue;
    std::size_t next = 0;
    for (const auto &data : child.children) {
      if (data.name != "data") continue;
      std::size_t line = next;
      if (const std::string *l = data.attr("line")) {
        auto v = parse_int<std::size_t>(*l);
        if (!v) throw Error(Errc::XmlSyntax, "block " + *el.attr("id") + ": bad exprs line \"" + *l + "\"");
        line = *v;
      }
      next = line + 1;
      const std::string *value = data.attr("value");
      const std::string text = value ? *value : std::string();
      if (spec) {
        if (line < spec->params.size()) params[spec->params[line].name] = text;
      } else {
        params[std::to_string(line)] = text;
      }
    }
    break;
  }
  return params;
}

Geometry read_geometry(const XmlElement &el, const std::string &id) {
  Geometry g;
  const XmlElement *geo = el.child("mxGeometry");
  if (!geo) return g;
  const std::string owner = "block " + id + " geometry";
  for (const auto &[key, value] : geo->attrs) {
    if (key == "x") g.x = real_attr(owner, key, value);
    else if (key == "y") g.y = real_attr(owner, key, value);
    else if (key == "width") g.width = real_attr(owner, key, value);
    else if (key == "height") g.height = real_attr(owner, key, value);
  }
  return g;
}

} // namespace

Diagram parse_xcos_xml(std::string_view bytes) {
  const XmlElement doc = detail::parse_xml(bytes);
  if (doc.name != "XcosDiagram")
    throw Error(Errc::XmlSyntax, "root element is <" + doc.name + ">, expected <XcosDiagram>");

  Diagram d;
  read_settings(doc, d);

  const XmlElement *model = doc.child("mxGraphModel");
  const XmlElement *root = model ? model->child("root") : nullptr;
  if (!root) throw Error(Errc::MissingRootCells, "document has no mxGraphModel/root");

  std::map<std::string, Cell, std::less<>> cells;
  std::vector<std::string> order;
  for (const auto &el : root->children) {
    const std::string *id = el.attr("id");
    if (!id) throw Error(Errc::XmlSyntax, "<" + el.name + "> cell has no id");
    Cell cell{&el, classify(el), std::nullopt};
    if (const std::string *p = el.attr("parent")) cell.parent = *p;
    if (!cells.emplace(*id, cell).second) throw Error(Errc::DuplicateId, "duplicate cell id '" + *id + "'");
    order.push_back(*id);
  }
  if (!cells.count(kRootCellId) || !cells.count(kDefaultParentId))
    throw Error(Errc::MissingRootCells, "cells \"0\" and \"1\" are required");

  for (const auto &id : order) {
    std::string cur = id;
    for (std::size_t hops = 0; cur != kRootCellId; ++hops) {
      const Cell &c = cells.at(cur);
      if (!c.parent || hops > cells.size())
        throw Error(Errc::OrphanCell, "cell '" + id + "' does not descend from cell \"0\"");
      auto it = cells.find(*c.parent);
      if (it == cells.end())
        throw Error(Errc::OrphanCell, "cell '" + id + "' has unknown parent '" + *c.parent + "'");
      cur = it->first;
    }
  }

  // Desktop-style port cells: ordering is 1-based per block and direction.
  std::map<std::string, PortCell, std::less<>> ports;
  std::map<std::pair<std::string, CellType>, std::size_t> port_counts;
  for (const auto &id : order) {
    const Cell &c = cells.at(id);
    if (c.type != CellType::InputPort && c.type != CellType::OutputPort && c.type != CellType::EventPort)
      continue;
    const std::string owner = c.parent.value_or("");
    std::size_t &count = port_counts[{owner, c.type}];
    std::size_t index = count;
    if (const std::string *ord = c.el->attr("ordering")) {
      auto v = parse_int<std::size_t>(*ord);
      if (!v || *v == 0) throw Error(Errc::XmlSyntax, "port '" + id + "': bad ordering \"" + *ord + "\"");
      index = *v - 1;
    }
    count = std::max(count, index + 1);
    ports.emplace(id, PortCell{owner, index, c.type});
  }

  for (const auto &id : order) {
    const Cell &c = cells.at(id);
    if (c.type != CellType::Block) continue;
    Block b;
    b.id = id;
    b.kind = *c.el->attr("interfaceFunctionName");
    for (const auto &[key, value] : c.el->attrs) {
      if (key == "id" || key == "interfaceFunctionName") continue;
      if (key == "parent" && value == kDefaultParentId) continue;
      b.attrs[key] = value;
    }
    const BlockSpec *spec = find_spec(b.kind);
    b.params = read_params(*c.el, spec);
    b.geometry = read_geometry(*c.el, id);
    if (spec) {
      b.params = with_defaults(*spec, b.params);
      const Arity arity = arity_for(*spec, b.params);
      b.n_in = arity.n_in;
      b.n_out = arity.n_out;
    } else {
      b.n_in = port_counts[{id, CellType::InputPort}];
      b.n_out = port_counts[{id, CellType::OutputPort}];
    }
    d.blocks.push_back(std::move(b));
  }

  auto endpoint = [&](const std::string &link_id, const XmlElement &el, const char *ref_key,
                      const char *port_key) -> std::pair<PortRef, CellType> {
    const std::string *ref = el.attr(ref_key);
    if (!ref) throw Error(Errc::BadEndpoint, "link " + link_id + " has no " + ref_key);
    if (auto p = ports.find(*ref); p != ports.end())
      return {PortRef{p->second.block, p->second.index}, p->second.type};
    if (!d.find_block(*ref))
      throw Error(Errc::BadEndpoint, "link " + link_id + " " + ref_key + " '" + *ref + "' is not a block or port");
    std::size_t port = 0;
    if (const std::string *p = el.attr(port_key)) {
      auto v = parse_int<std::size_t>(*p);
      if (!v) throw Error(Errc::XmlSyntax, "link " + link_id + ": bad " + port_key + " \"" + *p + "\"");
      port = *v;
    }
    return {PortRef{*ref, port}, CellType::Plain};
  };

  for (const auto &id : order) {
    const Cell &c = cells.at(id);
    if (c.type != CellType::Link) continue;
    auto [src, src_type] = endpoint(id, *c.el, "source", "sourcePort");
    auto [dst, dst_type] = endpoint(id, *c.el, "target", "targetPort");
    if (src_type == CellType::EventPort || dst_type == CellType::EventPort) continue;
    if (src_type == CellType::InputPort && dst_type == CellType::OutputPort) std::swap(src, dst);
    Link l;
    l.id = id;
    l.src = std::move(src);
    l.dst = std::move(dst);
    for (const auto &[key, value] : c.el->attrs) {
      if (key == "id" || key == "source" || key == "target" || key == "sourcePort" || key == "targetPort")
        continue;
      if (key == "parent" && value == kDefaultParentId) continue;
      l.attrs[key] = value;
    }
    d.links.push_back(std::move(l));
  }

  for (auto &b : d.blocks) {
    if (!b.opaque()) continue;
    for (const auto &l : d.links) {
      if (l.src.block == b.id) b.n_out = std::max(b.n_out, l.src.port + 1);
      if (l.dst.block == b.id) b.n_in = std::max(b.n_in, l.dst.port + 1);
    }
  }

  check_invariants(d);
  return d;
}

std::string serialize_xcos_xml(const Diagram &d) {
  detail::XmlWriter w;

  AttrList root_attrs{{"background", std::to_string(d.background)},
                      {"title", d.title},
                      {std::string(kFinalTime), format_real(d.settings.tf)},
                      {std::string(kAbsTol), format_real(d.settings.atol)},
                      {std::string(kRelTol), format_real(d.settings.rtol)}};
  if (d.settings.max_step) root_attrs.emplace_back(kMaxStep, format_real(*d.settings.max_step));
  root_attrs.emplace_back(kStartTime, format_real(d.settings.t0));
  root_attrs.emplace_back(kSolverKind, std::string(to_string(d.settings.solver)));
  root_attrs.emplace_back(kFixedStep, format_real(d.settings.dt));
  for (const auto &[k, v] : d.attrs) root_attrs.emplace_back(k, v);

  w.open("XcosDiagram", root_attrs);
  w.open("mxGraphModel", {{"as", "model"}});
  w.open("root", {});
  w.empty("mxCell", {{"id", "0"}});
  w.empty("mxCell", {{"id", "1"}, {"parent", "0"}});

  const Diagram c = canonicalize(d);
  std::set<std::string, std::less<>> taken{std::string(kRootCellId), std::string(kDefaultParentId)};
  for (const auto &b : c.blocks) taken.insert(b.id);
  for (const auto &l : c.links) taken.insert(l.id);
  auto port_id = [&taken](const std::string &block, const char *dir, std::size_t ordering) {
    std::string id = block + ":" + dir + std::to_string(ordering);
    while (taken.count(id)) id += '\'';
    taken.insert(id);
    return id;
  };

  for (const auto &b : c.blocks) {
    auto parent = b.attrs.find("parent");
    AttrList attrs{{"id", b.id},
                   {"parent", parent == b.attrs.end() ? std::string(kDefaultParentId) : parent->second},
                   {"interfaceFunctionName", b.kind}};
    for (const auto &[k, v] : b.attrs)
      if (k != "parent") attrs.emplace_back(k, v);
    w.open("BasicBlock", attrs);

    std::vector<std::pair<std::size_t, std::string>> lines;
    if (const BlockSpec *spec = find_spec(b.kind)) {
      for (std::size_t i = 0; i < spec->params.size(); ++i) {
        auto it = b.params.find(spec->params[i].name);
        lines.emplace_back(i, it == b.params.end() ? spec->params[i].default_raw : it->second);
      }
    } else {
      for (const auto &[name, raw] : b.params)
        if (auto line = parse_int<std::size_t>(name)) lines.emplace_back(*line, raw);
      std::sort(lines.begin(), lines.end());
    }
    if (!lines.empty()) {
      w.open("ScilabString", {{"as", "exprs"}, {"height", std::to_string(lines.size())}, {"width", "1"}});
      for (const auto &[line, raw] : lines)
        w.empty("data", {{"column", "0"}, {"line", std::to_string(line)}, {"value", raw}});
      w.close("ScilabString");
    }
    w.empty("mxGeometry", {{"as", "geometry"},
                           {"x", format_real(b.geometry.x)},
                           {"y", format_real(b.geometry.y)},
                           {"width", format_real(b.geometry.width)},
                           {"height", format_real(b.geometry.height)}});
    w.close("BasicBlock");
    // Unknown kinds have no palette arity, so their ports are spelled out.
    if (b.opaque()) {
      for (std::size_t i = 1; i <= b.n_in; ++i)
        w.empty("ExplicitInputPort", {{"id", port_id(b.id, "in", i)}, {"parent", b.id}, {"ordering", std::to_string(i)}});
      for (std::size_t i = 1; i <= b.n_out; ++i)
        w.empty("ExplicitOutputPort", {{"id", port_id(b.id, "out", i)}, {"parent", b.id}, {"ordering", std::to_string(i)}});
    }
  }

  for (const auto &l : c.links) {
    auto parent = l.attrs.find("parent");
    AttrList attrs{{"id", l.id},
                   {"parent", parent == l.attrs.end() ? std::string(kDefaultParentId) : parent->second},
                   {"source", l.src.block},
                   {"target", l.dst.block},
                   {"sourcePort", std::to_string(l.src.port)},
                   {"targetPort", std::to_string(l.dst.port)}};
    for (const auto &[k, v] : l.attrs)
      if (k != "parent") attrs.emplace_back(k, v);
    w.empty("ExplicitLink", attrs);
  }

  w.close("root");
  w.close("mxGraphModel");
  w.empty("mxCell", {{"id", "1"}, {"parent", "0"}, {"as", "defaultParent"}});
  w.close("XcosDiagram");
  return w.take();
}

} // namespace xcosw
