#pragma once

#include "xcosw/compiler.hpp"
#include "xcosw/sim_options.hpp"

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xcosw {

struct ProbeSeries {
  std::string id;
  std::vector<double> values;

  bool operator==(const ProbeSeries &) const = default;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;

  bool operator==(const StepStats &) const = default;
};

/// Time grid (strictly increasing, from t0 to tf inclusive) with one series
/// per probe, in probe order.
struct SimulationResult {
  std::vector<double> times;
  std::vector<ProbeSeries> signals;
  StepStats steps;
  SolverKind solver = SolverKind::Rk4;

  [[nodiscard]] const std::vector<double> *series(std::string_view probe_id) const;

  bool operator==(const SimulationResult &) const = default;
};

/// Per-run overrides that are not part of the diagram.
struct RunControl {
  /// Throws Error(Timeout) once passed.
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Replaces the compiled initial continuous state when non-empty.
  std::vector<double> initial_state;
};

/// One classical Runge-Kutta step with stages at t, t+h/2, t+h/2 and t+h.
/// `xd` is the held discrete state (defaults to the initial one when empty).
std::vector<double> rk4_step(const CompiledSystem &sys, double t, double h, std::span<const double> x,
                             std::span<const double> xd = {});

/// Sorted union of k*Ts in [t0, tf] over all sample grids, merged within
/// 1e-12*Ts. Times within that tolerance of t0 or tf snap to them.
std::vector<double> sample_schedule(const CompiledSystem &sys, double t0, double tf);

/// Fixed steps of opts.dt, shortened to land exactly on every sample hit,
/// every source breakpoint and tf. Probes are recorded after each step; at a
/// sample hit the record comes first and the discrete update second.
SimulationResult simulate_fixed(const CompiledSystem &sys, const SimOptions &opts,
                                const RunControl &control = {});

/// Dormand-Prince 5(4) with local extrapolation. A step is accepted when the
/// RMS of (x5 - x4) / (atol + rtol * max(|x|, |x5|)) is at most 1; the next
/// step is h * clamp(0.9 * err^(-1/5), 0.2, 5), capped at max_step. Lands on
/// the same stop points as simulate_fixed. Throws Error(StepUnderflow) when
/// the step falls below 1e-14 * (tf - t0).
SimulationResult simulate_adaptive(const CompiledSystem &sys, const SimOptions &opts,
                                   const RunControl &control = {});

/// Dispatches on opts.solver after validate_options.
SimulationResult simulate(const CompiledSystem &sys, const SimOptions &opts, const RunControl &control = {});

} // namespace xcosw
