#pragma once

#include "xcosw/palette.hpp"
#include "xcosw/transfer_function.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace xcosw {

namespace params {
struct Step {
  double step_time = 1.0;
  double initial = 0.0;
  double final_value = 1.0;
};
struct Constant {
  double value = 1.0;
};
struct Gain {
  double gain = 1.0;
};
struct Sum {
  SignVector signs;
};
struct Lti {
  TransferFunction tf;
  StateSpace ss;
};
struct Integrator {
  double x0 = 0.0;
};
struct Scope {};
struct UnitDelay {
  double period = 0.1;
  double x0 = 0.0;
};
struct SampleHold {
  double period = 0.1;
};
} // namespace params

using BlockParams =
    std::variant<params::Step, params::Constant, params::Gain, params::Sum, params::Lti,
                 params::Integrator, params::Scope, params::UnitDelay, params::SampleHold>;

/// A palette block with every parameter evaluated.
struct ResolvedBlock {
  std::string id;
  BlockParams params;

  [[nodiscard]] BlockKind kind() const;
  [[nodiscard]] std::size_t n_in() const;
  [[nodiscard]] std::size_t n_out() const;
  [[nodiscard]] bool feedthrough(std::size_t input) const;
  /// Continuous states (CLR, INTEGRAL_f).
  [[nodiscard]] std::size_t n_cstates() const;
  /// Discrete states (DOLLAR, SAMPHOLD).
  [[nodiscard]] std::size_t n_dstates() const;
  [[nodiscard]] std::optional<double> sample_period() const;
  /// Initial continuous or discrete state, whichever the kind has.
  [[nodiscard]] std::vector<double> initial_state() const;
};

/// One problem found while evaluating a block's parameters.
struct ParamIssue {
  std::string param;
  bool unset = false;
  std::string message;
};

/// Evaluates every parameter of `kind` and reports the ones that are unset or
/// invalid. Missing entries take palette defaults. Empty result means
/// resolve_block succeeds.
std::vector<ParamIssue> check_params(const BlockSpec &spec, const ParamMap &raw);

/// Throws Error(UnknownKind), Error(UnknownParam), Error(UnsetParam) naming the
/// block and parameter, ExprError, or Error(ImproperTF).
ResolvedBlock resolve_block(std::string id, std::string_view kind, const ParamMap &raw);

/// Which one-sided limit piecewise-constant sources report at their switching
/// instant. Integration stages strictly after a step start use FromLeft so a
/// step landing exactly on a switching time does not see the new value early.
enum class Approach { FromRight, FromLeft };

/// STEP_FUNCTION: initial before step_time, final from step_time on.
/// GAINBLK: gain*u. SUMMATION: sum of signs[i]*u[i]. CLR: C x + D u.
/// INTEGRAL_f: x. CONST_m: value. CSCOPE: no outputs.
/// Discrete kinds hold their output between sample hits. With `sampling` set
/// (evaluation at one of the block's hits) DOLLAR emits its state and SAMPHOLD
/// its current input; otherwise both emit the value latched at the last hit.
/// DOLLAR state is [latched output, delayed input]; SAMPHOLD state is [latch].
void block_output(const ResolvedBlock &block, std::span<const double> state,
                  std::span<const double> inputs, double t, std::span<double> outputs,
                  Approach approach = Approach::FromRight, bool sampling = false);

/// CLR: A x + B u. INTEGRAL_f: u. Kinds without continuous state write nothing.
void block_derivative(const ResolvedBlock &block, std::span<const double> state,
                      std::span<const double> inputs, double t, std::span<double> dstate);

/// New discrete state at a sample hit, applied after outputs were evaluated
/// with `sampling` set: DOLLAR latches its old state and stores the input,
/// SAMPHOLD latches the input. Throws Error(NotSampled) for kinds without a sample time or when
/// `t` is not a multiple of the period.
std::vector<double> block_discrete_update(const ResolvedBlock &block,
                                          std::span<const double> state,
                                          std::span<const double> inputs, double t);

/// True when t is an integer multiple of `period` up to a relative 1e-9.
bool is_sample_hit(double period, double t);

} // namespace xcosw
