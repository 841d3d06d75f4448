#pragma once

#include "xcosw/palette.hpp"
#include "xcosw/sim_options.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace xcosw {

/// Unrecognized persisted attributes, kept verbatim.
using AttrMap = std::map<std::string, std::string>;

/// Id ordering used wherever a deterministic order is needed: ids that are
/// plain decimal numbers come first in numeric order, the rest follow
/// lexicographically.
bool id_less(std::string_view a, std::string_view b) noexcept;

struct IdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const noexcept { return id_less(a, b); }
};

struct PortRef {
  std::string block;
  std::size_t port = 0;

  bool operator==(const PortRef &) const = default;
};

/// Canvas placement; no simulation meaning.
struct Geometry {
  double x = 0.0;
  double y = 0.0;
  double width = 40.0;
  double height = 40.0;

  bool operator==(const Geometry &) const = default;
};

struct Block {
  std::string id;
  /// Palette identifier (the interface function name). Kinds missing from the
  /// palette are kept as opaque blocks that fail to compile.
  std::string kind;
  ParamMap params;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  Geometry geometry;
  AttrMap attrs;

  [[nodiscard]] bool opaque() const { return find_spec(kind) == nullptr; }

  bool operator==(const Block &) const = default;
};

/// Directed connection from an output port to an input port.
struct Link {
  std::string id;
  PortRef src;
  PortRef dst;
  AttrMap attrs;

  bool operator==(const Link &) const = default;
};

struct Diagram {
  std::string title;
  long background = -1;
  std::vector<Block> blocks;
  std::vector<Link> links;
  SimOptions settings;
  AttrMap attrs;

  [[nodiscard]] const Block *find_block(std::string_view id) const;
  [[nodiscard]] Block *find_block(std::string_view id);
  [[nodiscard]] const Link *find_link(std::string_view id) const;
  /// Link driving the given input port, if any.
  [[nodiscard]] const Link *driver_of(const PortRef &input) const;

  bool operator==(const Diagram &) const = default;
};

/// Ids reserved for the two root cells of the XML form.
inline constexpr std::string_view kRootCellId = "0";
inline constexpr std::string_view kDefaultParentId = "1";

/// Smallest decimal id greater than every numeric block or link id and the
/// reserved root cells.
std::string fresh_id(const Diagram &d);

/// Appends a palette block with a fresh id. Missing parameters take palette
/// defaults. Throws Error(UnknownKind) or Error(UnknownParam).
std::string add_block(Diagram &d, std::string_view kind, const ParamMap &params = {},
                      Geometry geometry = {});

/// Appends a link. Throws Error(BadEndpoint) for a missing block or a port
/// index out of range and Error(PortOccupied) when `dst` already has a driver.
std::string connect(Diagram &d, const PortRef &src, const PortRef &dst);

/// Replaces one parameter's raw text, recomputing arity. Throws
/// Error(BadEndpoint) if the new arity would orphan an existing link.
void set_param(Diagram &d, std::string_view block_id, const std::string &name,
               std::string raw);

/// Blocks and links sorted by id_less. Attribute maps are already ordered.
Diagram canonicalize(Diagram d);

/// Checks every structural invariant: non-empty unique ids disjoint between
/// blocks and links and from the root cells, known-kind arity matching the
/// palette, link endpoints in range, one driver per input, and no XML-illegal
/// control characters in any text. Throws the matching Error.
void check_invariants(const Diagram &d);

} // namespace xcosw
