#include "xcosw/palette.hpp"

#include "xcosw/error.hpp"

#include <algorithm>

namespace xcosw {

namespace {

std::vector<BlockSpec> build_palette() {
  using S = ParamShape;
  std::vector<BlockSpec> p;
  p.push_back({BlockKind::StepFunction, "STEP_FUNCTION", "Step", 0, 1, false,
               {{"step_time", S::Scalar, "1", "s"},
                {"initial", S::Scalar, "0", ""},
                {"final", S::Scalar, "1", ""}},
               {}, 0, false});
  p.push_back({BlockKind::Const, "CONST_m", "Constant", 0, 1, false,
               {{"value", S::Scalar, "1", ""}}, {}, 0, false});
  p.push_back({BlockKind::Gain, "GAINBLK", "Gain", 1, 1, false,
               {{"gain", S::Scalar, "1", ""}}, {true}, 0, false});
  p.push_back({BlockKind::Summation, "SUMMATION", "Summation", 2, 1, true,
               {{"signs", S::SignVector, "[+1;-1]", ""}}, {true, true}, 0, false});
  p.push_back({BlockKind::Clr, "CLR", "Transfer function", 1, 1, false,
               {{"num", S::Rational, "1", ""}, {"den", S::Rational, "1+s", ""}},
               {false}, 1, false});
  p.push_back({BlockKind::Integral, "INTEGRAL_f", "Integrator", 1, 1, false,
               {{"x0", S::Scalar, "0", ""}}, {false}, 1, false});
  p.push_back({BlockKind::Scope, "CSCOPE", "Scope", 1, 0, false, {}, {true}, 0, false});
  p.push_back({BlockKind::Dollar, "DOLLAR", "Unit delay", 1, 1, false,
               {{"Ts", S::Scalar, "0.1", "s"}, {"x0", S::Scalar, "0", ""}},
               {false}, 0, true});
  p.push_back({BlockKind::SampleHold, "SAMPHOLD", "Sample and hold", 1, 1, false,
               {{"Ts", S::Scalar, "0.1", "s"}}, {true}, 0, true});
  return p;
}

} // namespace

const ParamSpec *BlockSpec::find_param(std::string_view param) const {
  auto it = std::find_if(params.begin(), params.end(),
                         [&](const ParamSpec &ps) { return ps.name == param; });
  return it == params.end() ? nullptr : &*it;
}

const std::vector<BlockSpec> &palette() {
  static const std::vector<BlockSpec> table = build_palette();
  return table;
}

std::string_view kind_name(BlockKind kind) noexcept { return spec_of(kind).name; }

std::optional<BlockKind> kind_from_name(std::string_view name) noexcept {
  if (const BlockSpec *spec = find_spec(name)) return spec->kind;
  return std::nullopt;
}

const BlockSpec *find_spec(std::string_view kind) noexcept {
  for (const auto &spec : palette())
    if (spec.name == kind) return &spec;
  return nullptr;
}

const BlockSpec &spec_of(BlockKind kind) noexcept {
  return palette()[static_cast<std::size_t>(kind)];
}

Arity arity_for(const BlockSpec &spec, const ParamMap &params) {
  Arity arity{spec.n_in, spec.n_out};
  if (!spec.n_in_from_signs) return arity;
  auto it = params.find("signs");
  if (it == params.end()) return arity;
  try {
    ParamValue v = parse_param_expr(it->second, ParamShape::SignVector);
    if (auto *signs = std::get_if<SignVector>(&v.parsed)) arity.n_in = signs->size();
  } catch (const Error &) {
    // malformed signs are reported by validation; keep the default arity
  }
  return arity;
}

ParamMap with_defaults(const BlockSpec &spec, const ParamMap &params) {
  ParamMap out;
  for (const auto &[name, raw] : params) {
    if (!spec.find_param(name))
      throw Error(Errc::UnknownParam,
                  spec.name + " has no parameter '" + name + "'");
    out.emplace(name, raw);
  }
  for (const auto &ps : spec.params) out.emplace(ps.name, ps.default_raw);
  return out;
}

} // namespace xcosw
