#include "xcosw/sim_options.hpp"

#include "xcosw/error.hpp"
#include "xcosw/format.hpp"

#include <cmath>
#include <string>

namespace xcosw {

std::string_view to_string(SolverKind kind) noexcept {
  return kind == SolverKind::Rk4 ? "rk4" : "adaptive";
}

std::optional<SolverKind> parse_solver_kind(std::string_view text) noexcept {
  if (text == "rk4") return SolverKind::Rk4;
  if (text == "adaptive") return SolverKind::Adaptive;
  return std::nullopt;
}

void validate_options(const SimOptions &opts) {
  auto fail = [](const std::string &msg) { throw Error(Errc::InvalidOptions, msg); };
  if (!std::isfinite(opts.t0) || !std::isfinite(opts.tf))
    fail("t0 and tf must be finite");
  if (!(opts.t0 < opts.tf))
    fail("t0 (" + format_real(opts.t0) + ") must be less than tf (" +
         format_real(opts.tf) + ")");
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) fail("dt must be positive");
  if (!(opts.rtol > 0.0) || !std::isfinite(opts.rtol)) fail("rtol must be positive");
  if (!(opts.atol > 0.0) || !std::isfinite(opts.atol)) fail("atol must be positive");
  if (opts.max_step && (!(*opts.max_step > 0.0) || !std::isfinite(*opts.max_step)))
    fail("max_step must be positive");
}

} // namespace xcosw
