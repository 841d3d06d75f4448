#include "xcosw/blocks.hpp"

#include "xcosw/error.hpp"
#include "xcosw/format.hpp"

#include <algorithm>
#include <cmath>

namespace xcosw {

namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

using Values = std::map<std::string, ParsedParam>;

double scalar(const Values &v, const std::string &name) { return std::get<double>(v.at(name)); }

TransferFunction clr_transfer(const Values &v) {
  const auto &num = std::get<TransferFunction>(v.at("num"));
  const auto &den = std::get<TransferFunction>(v.at("den"));
  // (num.num / num.den) / (den.num / den.den)
  return {trim(poly_mul(num.num, den.den)), trim(poly_mul(num.den, den.num))};
}

struct SemanticIssue {
  std::string param;
  Errc code;
  std::string message;
};

std::optional<SemanticIssue> semantic_check(const BlockSpec &spec, const Values &v) {
  if (spec.discrete && !(scalar(v, "Ts") > 0.0))
    return SemanticIssue{"Ts", Errc::WrongShape, "sample period Ts must be positive"};
  if (spec.kind == BlockKind::Clr) {
    const auto &den = std::get<TransferFunction>(v.at("den"));
    if (is_zero(den.num))
      return SemanticIssue{"den", Errc::ImproperTF, "denominator is zero"};
    const TransferFunction tf = clr_transfer(v);
    if (!is_proper(tf))
      return SemanticIssue{"num", Errc::ImproperTF,
                           "transfer function is improper (numerator degree " +
                               std::to_string(degree(tf.num)) + " > denominator degree " +
                               std::to_string(degree(tf.den)) + ")"};
  }
  return std::nullopt;
}

const BlockSpec &require_spec(std::string_view kind) {
  const BlockSpec *spec = find_spec(kind);
  if (!spec) throw Error(Errc::UnknownKind, "unknown block kind '" + std::string(kind) + "'");
  return *spec;
}

} // namespace

BlockKind ResolvedBlock::kind() const {
  return std::visit(Overloaded{
                        [](const params::Step &) { return BlockKind::StepFunction; },
                        [](const params::Constant &) { return BlockKind::Const; },
                        [](const params::Gain &) { return BlockKind::Gain; },
                        [](const params::Sum &) { return BlockKind::Summation; },
                        [](const params::Lti &) { return BlockKind::Clr; },
                        [](const params::Integrator &) { return BlockKind::Integral; },
                        [](const params::Scope &) { return BlockKind::Scope; },
                        [](const params::UnitDelay &) { return BlockKind::Dollar; },
                        [](const params::SampleHold &) { return BlockKind::SampleHold; },
                    },
                    params);
}

std::size_t ResolvedBlock::n_in() const {
  if (auto *sum = std::get_if<params::Sum>(&params)) return sum->signs.size();
  return spec_of(kind()).n_in;
}

std::size_t ResolvedBlock::n_out() const { return spec_of(kind()).n_out; }

bool ResolvedBlock::feedthrough(std::size_t input) const {
  if (input >= n_in()) return false;
  if (auto *lti = std::get_if<params::Lti>(&params)) return lti->ss.d != 0.0;
  const auto kind_ = kind();
  return kind_ == BlockKind::Gain || kind_ == BlockKind::Summation || kind_ == BlockKind::Scope ||
         kind_ == BlockKind::SampleHold;
}

std::size_t ResolvedBlock::n_cstates() const {
  if (auto *lti = std::get_if<params::Lti>(&params)) return lti->ss.n;
  return std::holds_alternative<params::Integrator>(params) ? 1 : 0;
}

std::size_t ResolvedBlock::n_dstates() const {
  if (std::holds_alternative<params::UnitDelay>(params)) return 2;
  return std::holds_alternative<params::SampleHold>(params) ? 1 : 0;
}

std::optional<double> ResolvedBlock::sample_period() const {
  if (auto *d = std::get_if<params::UnitDelay>(&params)) return d->period;
  if (auto *h = std::get_if<params::SampleHold>(&params)) return h->period;
  return std::nullopt;
}

std::vector<double> ResolvedBlock::initial_state() const {
  if (auto *lti = std::get_if<params::Lti>(&params)) return std::vector<double>(lti->ss.n, 0.0);
  if (auto *in = std::get_if<params::Integrator>(&params)) return {in->x0};
  if (auto *d = std::get_if<params::UnitDelay>(&params)) return {d->x0, d->x0};
  if (std::holds_alternative<params::SampleHold>(params)) return {0.0};
  return {};
}

std::vector<ParamIssue> check_params(const BlockSpec &spec, const ParamMap &raw) {
  std::vector<ParamIssue> issues;
  for (const auto &[name, text] : raw)
    if (!spec.find_param(name)) issues.push_back({name, false, "unknown parameter"});

  Values values;
  for (const auto &ps : spec.params) {
    auto it = raw.find(ps.name);
    const std::string &text = it == raw.end() ? ps.default_raw : it->second;
    try {
      ParamValue v = parse_param_expr(text, ps.shape);
      if (v.is_unset())
        issues.push_back({ps.name, true, "parameter '" + ps.name + "' is unset"});
      else
        values.emplace(ps.name, std::move(v.parsed));
    } catch (const Error &e) {
      issues.push_back({ps.name, false, "parameter '" + ps.name + "': " + e.what()});
    }
  }
  if (issues.empty()) {
    if (auto issue = semantic_check(spec, values))
      issues.push_back({issue->param, false, "parameter '" + issue->param + "': " + issue->message});
  }
  return issues;
}

ResolvedBlock resolve_block(std::string id, std::string_view kind, const ParamMap &raw) {
  const BlockSpec &spec = require_spec(kind);
  const ParamMap full = with_defaults(spec, raw);

  Values v;
  for (const auto &ps : spec.params) {
    ParamValue pv = parse_param_expr(full.at(ps.name), ps.shape);
    if (pv.is_unset())
      throw Error(Errc::UnsetParam, "block " + id + ": parameter '" + ps.name + "' is unset");
    v.emplace(ps.name, std::move(pv.parsed));
  }
  if (auto issue = semantic_check(spec, v)) {
    const std::string msg = "block " + id + ": parameter '" + issue->param + "': " + issue->message;
    if (issue->code == Errc::WrongShape) throw ExprError(Errc::WrongShape, 0, msg);
    throw Error(issue->code, msg);
  }

  ResolvedBlock block{std::move(id), params::Scope{}};
  switch (spec.kind) {
  case BlockKind::StepFunction:
    block.params = params::Step{scalar(v, "step_time"), scalar(v, "initial"), scalar(v, "final")};
    break;
  case BlockKind::Const: block.params = params::Constant{scalar(v, "value")}; break;
  case BlockKind::Gain: block.params = params::Gain{scalar(v, "gain")}; break;
  case BlockKind::Summation: block.params = params::Sum{std::get<SignVector>(v.at("signs"))}; break;
  case BlockKind::Clr: {
    TransferFunction tf = clr_transfer(v);
    StateSpace ss = tf_to_state_space(tf);
    block.params = params::Lti{std::move(tf), std::move(ss)};
    break;
  }
  case BlockKind::Integral: block.params = params::Integrator{scalar(v, "x0")}; break;
  case BlockKind::Scope: block.params = params::Scope{}; break;
  case BlockKind::Dollar: block.params = params::UnitDelay{scalar(v, "Ts"), scalar(v, "x0")}; break;
  case BlockKind::SampleHold: block.params = params::SampleHold{scalar(v, "Ts")}; break;
  }
  return block;
}

void block_output(const ResolvedBlock &block, std::span<const double> state,
                  std::span<const double> inputs, double t, std::span<double> outputs,
                  Approach approach, bool sampling) {
  std::visit(Overloaded{
                 [&](const params::Step &p) {
                   const bool after = approach == Approach::FromRight ? t >= p.step_time
                                                                      : t > p.step_time;
                   outputs[0] = after ? p.final_value : p.initial;
                 },
                 [&](const params::Constant &p) { outputs[0] = p.value; },
                 [&](const params::Gain &p) { outputs[0] = p.gain * inputs[0]; },
                 [&](const params::Sum &p) {
                   double acc = 0.0;
                   for (std::size_t i = 0; i < p.signs.size(); ++i) acc += p.signs[i] * inputs[i];
                   outputs[0] = acc;
                 },
                 [&](const params::Lti &p) {
                   double y = 0.0;
                   for (std::size_t i = 0; i < p.ss.n; ++i) y += p.ss.c[i] * state[i];
                   if (p.ss.d != 0.0) y += p.ss.d * inputs[0];
                   outputs[0] = y;
                 },
                 [&](const params::Integrator &) { outputs[0] = state[0]; },
                 [&](const params::Scope &) {},
                 [&](const params::UnitDelay &) { outputs[0] = sampling ? state[1] : state[0]; },
                 [&](const params::SampleHold &) { outputs[0] = sampling ? inputs[0] : state[0]; },
             },
             block.params);
}

void block_derivative(const ResolvedBlock &block, std::span<const double> state,
                      std::span<const double> inputs, double /*t*/, std::span<double> dstate) {
  if (auto *lti = std::get_if<params::Lti>(&block.params)) {
    const StateSpace &ss = lti->ss;
    for (std::size_t i = 0; i < ss.n; ++i) {
      double acc = ss.b[i] * inputs[0];
      for (std::size_t j = 0; j < ss.n; ++j) acc += ss.a[i * ss.n + j] * state[j];
      dstate[i] = acc;
    }
  } else if (std::holds_alternative<params::Integrator>(block.params)) {
    dstate[0] = inputs[0];
  }
}

bool is_sample_hit(double period, double t) {
  if (!(period > 0.0)) return false;
  const double k = std::round(t / period);
  return std::fabs(t - k * period) <= 1e-9 * period * std::max(1.0, std::fabs(k));
}

std::vector<double> block_discrete_update(const ResolvedBlock &block,
                                          std::span<const double> state,
                                          std::span<const double> inputs, double t) {
  const auto period = block.sample_period();
  if (!period)
    throw Error(Errc::NotSampled, "block " + block.id + " (" +
                                      std::string(kind_name(block.kind())) +
                                      ") has no sample time");
  if (!is_sample_hit(*period, t))
    throw Error(Errc::NotSampled, "block " + block.id + ": t=" + format_real(t) +
                                      " is not a multiple of Ts=" + format_real(*period));
  if (std::holds_alternative<params::UnitDelay>(block.params)) return {state[1], inputs[0]};
  return {inputs[0]};
}

} // namespace xcosw
