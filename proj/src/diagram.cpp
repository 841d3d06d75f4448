#include "xcosw/diagram.hpp"

#include "xcosw/error.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace xcosw {

namespace {

bool is_decimal(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_zeros(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return s;
}

std::string increment_decimal(std::string s) {
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (*it != '9') {
      ++*it;
      return s;
    }
    *it = '0';
  }
  return "1" + s;
}

bool legal_text(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x20 && c != '\t' && c != '\n' && c != '\r';
  });
}

bool is_name_start(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' || c >= 0x80;
}

bool legal_attr_name(std::string_view s) {
  if (s.empty() || !is_name_start(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
  });
}

constexpr std::array kDiagramReserved{
    std::string_view{"background"},           std::string_view{"title"},
    std::string_view{"finalIntegrationTime"}, std::string_view{"integratorAbsoluteTolerance"},
    std::string_view{"integratorRelativeTolerance"}, std::string_view{"maximumStepSize"},
    std::string_view{"initialIntegrationTime"}, std::string_view{"solverKind"},
    std::string_view{"fixedStepSize"}};
constexpr std::array kBlockReserved{std::string_view{"id"}, std::string_view{"interfaceFunctionName"}};
constexpr std::array kLinkReserved{std::string_view{"id"}, std::string_view{"source"},
                                   std::string_view{"target"}, std::string_view{"sourcePort"},
                                   std::string_view{"targetPort"}};

template <std::size_t N>
void check_attrs(const AttrMap &attrs, const std::array<std::string_view, N> &reserved,
                 const std::string &owner) {
  for (const auto &[key, value] : attrs) {
    if (!legal_attr_name(key))
      throw Error(Errc::InvalidText, owner + ": '" + key + "' is not a valid attribute name");
    if (std::find(reserved.begin(), reserved.end(), key) != reserved.end())
      throw Error(Errc::InvalidText, owner + ": attribute '" + key + "' is reserved");
    if (!legal_text(value))
      throw Error(Errc::InvalidText, owner + ": attribute '" + key + "' contains control characters");
  }
}

void check_text(std::string_view text, const std::string &what) {
  if (!legal_text(text)) throw Error(Errc::InvalidText, what + " contains control characters");
}

std::string port_text(const PortRef &p) { return p.block + ":" + std::to_string(p.port); }

} // namespace

bool id_less(std::string_view a, std::string_view b) noexcept {
  const bool na = is_decimal(a);
  const bool nb = is_decimal(b);
  if (na != nb) return na;
  if (na) {
    const auto sa = strip_zeros(a);
    const auto sb = strip_zeros(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

const Block *Diagram::find_block(std::string_view id) const {
  auto it = std::find_if(blocks.begin(), blocks.end(), [&](const Block &b) { return b.id == id; });
  return it == blocks.end() ? nullptr : &*it;
}

Block *Diagram::find_block(std::string_view id) {
  auto it = std::find_if(blocks.begin(), blocks.end(), [&](const Block &b) { return b.id == id; });
  return it == blocks.end() ? nullptr : &*it;
}

const Link *Diagram::find_link(std::string_view id) const {
  auto it = std::find_if(links.begin(), links.end(), [&](const Link &l) { return l.id == id; });
  return it == links.end() ? nullptr : &*it;
}

const Link *Diagram::driver_of(const PortRef &input) const {
  auto it = std::find_if(links.begin(), links.end(), [&](const Link &l) { return l.dst == input; });
  return it == links.end() ? nullptr : &*it;
}

std::string fresh_id(const Diagram &d) {
  std::string max_id(kDefaultParentId);
  auto consider = [&](const std::string &id) {
    if (is_decimal(id) && id_less(max_id, id)) max_id = id;
  };
  for (const auto &b : d.blocks) consider(b.id);
  for (const auto &l : d.links) consider(l.id);
  return increment_decimal(std::string(strip_zeros(max_id)));
}

std::string add_block(Diagram &d, std::string_view kind, const ParamMap &params, Geometry geometry) {
  const BlockSpec *spec = find_spec(kind);
  if (!spec) throw Error(Errc::UnknownKind, "unknown block kind '" + std::string(kind) + "'");
  Block block;
  block.id = fresh_id(d);
  block.kind = spec->name;
  block.params = with_defaults(*spec, params);
  const Arity arity = arity_for(*spec, block.params);
  block.n_in = arity.n_in;
  block.n_out = arity.n_out;
  block.geometry = geometry;
  d.blocks.push_back(std::move(block));
  return d.blocks.back().id;
}

std::string connect(Diagram &d, const PortRef &src, const PortRef &dst) {
  const Block *from = d.find_block(src.block);
  if (!from) throw Error(Errc::BadEndpoint, "no block '" + src.block + "'");
  if (src.port >= from->n_out)
    throw Error(Errc::BadEndpoint, "block " + src.block + " has no output port " + std::to_string(src.port));
  const Block *to = d.find_block(dst.block);
  if (!to) throw Error(Errc::BadEndpoint, "no block '" + dst.block + "'");
  if (dst.port >= to->n_in)
    throw Error(Errc::BadEndpoint, "block " + dst.block + " has no input port " + std::to_string(dst.port));
  if (const Link *existing = d.driver_of(dst))
    throw Error(Errc::PortOccupied,
                "input " + port_text(dst) + " is already driven by link " + existing->id);
  Link link{fresh_id(d), src, dst, {}};
  d.links.push_back(std::move(link));
  return d.links.back().id;
}

void set_param(Diagram &d, std::string_view block_id, const std::string &name, std::string raw) {
  Block *block = d.find_block(block_id);
  if (!block) throw Error(Errc::BadEndpoint, "no block '" + std::string(block_id) + "'");
  const BlockSpec *spec = find_spec(block->kind);
  if (!spec) {
    block->params[name] = std::move(raw);
    return;
  }
  if (!spec->find_param(name))
    throw Error(Errc::UnknownParam, spec->name + " has no parameter '" + name + "'");
  ParamMap params = block->params;
  params[name] = std::move(raw);
  const Arity arity = arity_for(*spec, params);
  for (const auto &l : d.links) {
    if ((l.dst.block == block->id && l.dst.port >= arity.n_in) ||
        (l.src.block == block->id && l.src.port >= arity.n_out))
      throw Error(Errc::BadEndpoint, "changing " + name + " would disconnect link " + l.id);
  }
  block->params = std::move(params);
  block->n_in = arity.n_in;
  block->n_out = arity.n_out;
}

Diagram canonicalize(Diagram d) {
  std::stable_sort(d.blocks.begin(), d.blocks.end(),
                   [](const Block &a, const Block &b) { return id_less(a.id, b.id); });
  std::stable_sort(d.links.begin(), d.links.end(),
                   [](const Link &a, const Link &b) { return id_less(a.id, b.id); });
  return d;
}

void check_invariants(const Diagram &d) {
  check_text(d.title, "title");
  check_attrs(d.attrs, kDiagramReserved, "diagram");

  std::set<std::string, std::less<>> ids{std::string(kRootCellId), std::string(kDefaultParentId)};
  auto claim = [&](const std::string &id, const char *what) {
    if (id.empty()) throw Error(Errc::DuplicateId, std::string(what) + " with empty id");
    check_text(id, std::string(what) + " id");
    if (!ids.insert(id).second)
      throw Error(Errc::DuplicateId, "id '" + id + "' is used more than once or is reserved");
  };

  for (const auto &b : d.blocks) {
    claim(b.id, "block");
    check_text(b.kind, "block " + b.id + " kind");
    check_attrs(b.attrs, kBlockReserved, "block " + b.id);
    for (const auto &[name, raw] : b.params) {
      check_text(name, "block " + b.id + " parameter name");
      check_text(raw, "block " + b.id + " parameter " + name);
    }
    if (const BlockSpec *spec = find_spec(b.kind)) {
      const Arity arity = arity_for(*spec, b.params);
      if (arity != Arity{b.n_in, b.n_out})
        throw Error(Errc::BadEndpoint, "block " + b.id + " has " + std::to_string(b.n_in) + "/" +
                                           std::to_string(b.n_out) + " ports but " + spec->name +
                                           " needs " + std::to_string(arity.n_in) + "/" +
                                           std::to_string(arity.n_out));
    }
  }

  // A preserved "parent" attribute must name a root cell or a block, without cycles.
  auto check_parent = [&](const AttrMap &attrs, const std::string &owner) {
    auto it = attrs.find("parent");
    std::size_t hops = 0;
    while (it != attrs.end() && it->second != kRootCellId && it->second != kDefaultParentId) {
      const Block *p = d.find_block(it->second);
      if (!p || ++hops > d.blocks.size())
        throw Error(Errc::OrphanCell, owner + " has parent '" + it->second +
                                          "' that does not lead to a root cell");
      it = p->attrs.find("parent");
      if (it == p->attrs.end()) return;
    }
  };
  for (const auto &b : d.blocks) check_parent(b.attrs, "block " + b.id);
  for (const auto &l : d.links) check_parent(l.attrs, "link " + l.id);

  std::set<std::pair<std::string, std::size_t>> driven;
  for (const auto &l : d.links) {
    claim(l.id, "link");
    check_attrs(l.attrs, kLinkReserved, "link " + l.id);
    const Block *from = d.find_block(l.src.block);
    if (!from || l.src.port >= from->n_out)
      throw Error(Errc::BadEndpoint, "link " + l.id + " starts at missing output " + port_text(l.src));
    const Block *to = d.find_block(l.dst.block);
    if (!to || l.dst.port >= to->n_in)
      throw Error(Errc::BadEndpoint, "link " + l.id + " ends at missing input " + port_text(l.dst));
    if (!driven.emplace(l.dst.block, l.dst.port).second)
      throw Error(Errc::PortOccupied, "input " + port_text(l.dst) + " has more than one driver");
  }
}

} // namespace xcosw
