#pragma once

#include "xcosw/param_expr.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xcosw {

/// Raw parameter text keyed by parameter name, exactly as entered or persisted.
using ParamMap = std::map<std::string, std::string>;

enum class BlockKind {
  StepFunction,
  Const,
  Gain,
  Summation,
  Clr,
  Integral,
  Scope,
  Dollar,
  SampleHold,
};

std::string_view kind_name(BlockKind kind) noexcept;
std::optional<BlockKind> kind_from_name(std::string_view name) noexcept;

struct ParamSpec {
  std::string name;
  ParamShape shape = ParamShape::Scalar;
  std::string default_raw;
  std::string unit;
};

/// Static description of one palette entry. Arity, feedthrough and state
/// counts given here are the values for default parameters; SUMMATION's
/// input count follows its sign vector and CLR's feedthrough and state count
/// follow its transfer function (see arity_for / resolve_block).
struct BlockSpec {
  BlockKind kind;
  std::string name;
  std::string label;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  bool n_in_from_signs = false;
  std::vector<ParamSpec> params;
  std::vector<bool> feedthrough;
  std::size_t n_states = 0;
  bool discrete = false;

  [[nodiscard]] const ParamSpec *find_param(std::string_view param) const;
};

const std::vector<BlockSpec> &palette();
const BlockSpec *find_spec(std::string_view kind_name) noexcept;
const BlockSpec &spec_of(BlockKind kind) noexcept;

struct Arity {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  bool operator==(const Arity &) const = default;
};

/// Port counts for a block of this kind with these raw parameters. A
/// SUMMATION whose sign vector is unset or malformed keeps the default two
/// inputs.
Arity arity_for(const BlockSpec &spec, const ParamMap &params);

/// Copy of `params` with every missing palette parameter set to its default.
/// Throws Error(UnknownParam) for names the kind does not declare.
ParamMap with_defaults(const BlockSpec &spec, const ParamMap &params);

} // namespace xcosw
