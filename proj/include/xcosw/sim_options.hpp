#pragma once

#include <optional>
#include <string_view>

namespace xcosw {

enum class SolverKind { Rk4, Adaptive };

std::string_view to_string(SolverKind kind) noexcept;
std::optional<SolverKind> parse_solver_kind(std::string_view text) noexcept;

/// Run settings stored with a diagram and overridable per request.
struct SimOptions {
  double t0 = 0.0;
  double tf = 10.0;
  SolverKind solver = SolverKind::Rk4;
  double dt = 1e-3;
  double rtol = 1e-6;
  double atol = 1e-9;
  /// Unset means (tf - t0) / 10.
  std::optional<double> max_step;

  [[nodiscard]] double effective_max_step() const {
    return max_step ? *max_step : (tf - t0) / 10.0;
  }

  bool operator==(const SimOptions &) const = default;
};

/// Throws Error(InvalidOptions) unless t0 < tf, dt > 0, rtol > 0, atol > 0
/// and max_step (when set) > 0, all finite.
void validate_options(const SimOptions &opts);

} // namespace xcosw
