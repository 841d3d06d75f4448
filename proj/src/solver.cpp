#include "xcosw/solver.hpp"

#include "xcosw/error.hpp"
#include "xcosw/format.hpp"

#include <algorithm>
#include <cmath>

namespace xcosw {

const std::vector<double> *SimulationResult::series(std::string_view probe_id) const {
  for (const auto &s : signals)
    if (s.id == probe_id) return &s.values;
  return nullptr;
}

namespace {

/// Scratch storage and recording for one run.
class Run {
public:
  Run(const CompiledSystem &sys, const RunControl &control, SolverKind kind)
      : sys_(sys), control_(control), signals_(sys.signal_count(), 0.0),
        probe_buf_(sys.probes().size(), 0.0) {
    x = control.initial_state.empty() ? sys.initial_state() : control.initial_state;
    if (x.size() != sys.state_dim())
      throw Error(Errc::InvalidOptions, "initial state has " + std::to_string(x.size()) +
                                            " entries, system has " + std::to_string(sys.state_dim()));
    xd = sys.initial_discrete_state();
    result_.solver = kind;
    for (const auto &p : sys.probes()) result_.signals.push_back({p.id, {}});
  }

  void eval(double t, std::span<const double> state, std::span<double> dx, Approach approach) {
    sys_.derivative(t, state, xd, signals_, dx, approach);
  }

  /// Records probes at t and applies the discrete update when t is a hit.
  void record(double t, bool sample_hit) {
    sys_.outputs(t, x, xd, signals_, Approach::FromRight, sample_hit);
    sys_.read_probes(signals_, probe_buf_);
    result_.times.push_back(t);
    for (std::size_t i = 0; i < probe_buf_.size(); ++i) result_.signals[i].values.push_back(probe_buf_[i]);
    if (sample_hit) sys_.discrete_update(t, xd, signals_);
  }

  void check_deadline() const {
    if (control_.deadline && std::chrono::steady_clock::now() > *control_.deadline)
      throw Error(Errc::Timeout, "simulation exceeded its time budget");
  }

  SimulationResult take() { return std::move(result_); }

  std::vector<double> x;
  std::vector<double> xd;
  StepStats &stats() { return result_.steps; }

private:
  const CompiledSystem &sys_;
  const RunControl &control_;
  std::vector<double> signals_;
  std::vector<double> probe_buf_;
  SimulationResult result_;
};

struct Stop {
  double t;
  bool sample_hit;
};

/// Stop points after t0: sample hits, source breakpoints and tf.
std::vector<Stop> stop_points(const CompiledSystem &sys, const SimOptions &opts,
                              const std::vector<double> &events) {
  const double tol = 1e-12 * std::max(1.0, std::fabs(opts.tf) + std::fabs(opts.t0));
  std::vector<Stop> raw;
  for (double e : events)
    if (e > opts.t0) raw.push_back({e, true});
  for (double b : sys.breakpoints())
    if (b > opts.t0 + tol && b < opts.tf - tol) raw.push_back({b, false});
  raw.push_back({opts.tf, false});
  std::stable_sort(raw.begin(), raw.end(), [](const Stop &a, const Stop &b) { return a.t < b.t; });

  std::vector<Stop> out;
  for (const auto &s : raw) {
    if (!out.empty() && s.t - out.back().t <= tol) {
      out.back().sample_hit = out.back().sample_hit || s.sample_hit;
      if (s.sample_hit) out.back().t = s.t;
      continue;
    }
    out.push_back(s);
  }
  // tf itself must be the final stop.
  out.back().t = opts.tf;
  return out;
}

void rk4_into(Run &run, const CompiledSystem &sys, double t, double h, std::span<const double> x,
              std::span<double> x_next, std::vector<double> (&k)[4], std::vector<double> &tmp) {
  const std::size_t n = sys.state_dim();
  run.eval(t, x, k[0], Approach::FromRight);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k[0][i];
  run.eval(t + 0.5 * h, tmp, k[1], Approach::FromLeft);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k[1][i];
  run.eval(t + 0.5 * h, tmp, k[2], Approach::FromLeft);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k[2][i];
  run.eval(t + h, tmp, k[3], Approach::FromLeft);
  for (std::size_t i = 0; i < n; ++i)
    x_next[i] = x[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x_next[i]))
      throw Error(Errc::NonFinite, "state " + std::to_string(i) + " is not finite at t=" + format_real(t + h));
}

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,         7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

} // namespace

std::vector<double> rk4_step(const CompiledSystem &sys, double t, double h, std::span<const double> x,
                             std::span<const double> xd) {
  if (!(h > 0.0)) throw Error(Errc::InvalidOptions, "step size must be positive");
  if (x.size() != sys.state_dim()) throw Error(Errc::InvalidOptions, "state length does not match the system");
  RunControl control;
  control.initial_state.assign(x.begin(), x.end());
  Run run(sys, control, SolverKind::Rk4);
  if (!xd.empty()) {
    if (xd.size() != sys.discrete_dim())
      throw Error(Errc::InvalidOptions, "discrete state length does not match the system");
    run.xd.assign(xd.begin(), xd.end());
  }
  const std::size_t n = sys.state_dim();
  std::vector<double> k[4] = {std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                              std::vector<double>(n)};
  std::vector<double> tmp(n), out(n);
  rk4_into(run, sys, t, h, x, out, k, tmp);
  return out;
}

std::vector<double> sample_schedule(const CompiledSystem &sys, double t0, double tf) {
  std::vector<std::pair<double, double>> hits; // (time, period)
  for (const auto &grid : sys.sample_grids()) {
    const double ts = grid.period;
    const double tol = 1e-12 * ts;
    const auto k_first = static_cast<long long>(std::ceil((t0 - tol) / ts));
    const auto k_last = static_cast<long long>(std::floor((tf + tol) / ts));
    for (long long k = k_first; k <= k_last; ++k) {
      double t = static_cast<double>(k) * ts;
      if (std::fabs(t - t0) <= tol) t = t0;
      if (std::fabs(t - tf) <= tol) t = tf;
      hits.emplace_back(t, ts);
    }
  }
  std::sort(hits.begin(), hits.end());
  std::vector<double> out;
  double last_period = 0.0;
  for (const auto &[t, ts] : hits) {
    if (!out.empty() && t - out.back() <= 1e-12 * std::min(ts, last_period)) continue;
    out.push_back(t);
    last_period = ts;
  }
  return out;
}

SimulationResult simulate_fixed(const CompiledSystem &sys, const SimOptions &opts, const RunControl &control) {
  validate_options(opts);
  Run run(sys, control, SolverKind::Rk4);
  const auto events = sample_schedule(sys, opts.t0, opts.tf);
  const auto stops = stop_points(sys, opts, events);

  const std::size_t n = sys.state_dim();
  std::vector<double> k[4] = {std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                              std::vector<double>(n)};
  std::vector<double> tmp(n), x_next(n);

  double t = opts.t0;
  run.record(t, !events.empty() && events.front() == opts.t0);
  for (const auto &stop : stops) {
    const double seg_start = t;
    for (std::size_t step = 1; t < stop.t; ++step) {
      run.check_deadline();
      const double grid = seg_start + static_cast<double>(step) * opts.dt;
      const bool land = grid >= stop.t - 1e-9 * opts.dt;
      const double t_new = land ? stop.t : grid;
      rk4_into(run, sys, t, t_new - t, run.x, x_next, k, tmp);
      run.x.swap(x_next);
      t = t_new;
      ++run.stats().accepted;
      run.record(t, land && stop.sample_hit);
    }
  }
  return run.take();
}

SimulationResult simulate_adaptive(const CompiledSystem &sys, const SimOptions &opts, const RunControl &control) {
  validate_options(opts);
  Run run(sys, control, SolverKind::Adaptive);
  const auto events = sample_schedule(sys, opts.t0, opts.tf);
  const auto stops = stop_points(sys, opts, events);

  const std::size_t n = sys.state_dim();
  std::vector<std::vector<double>> k(7, std::vector<double>(n));
  std::vector<double> tmp(n), x5(n);
  const double max_step = opts.effective_max_step();
  const double min_step = 1e-14 * (opts.tf - opts.t0);

  double t = opts.t0;
  double h = std::min(max_step, 1e-3 * (opts.tf - opts.t0));
  run.record(t, !events.empty() && events.front() == opts.t0);
  for (const auto &stop : stops) {
    bool just_rejected = false;
    while (t < stop.t) {
      run.check_deadline();
      const bool land = t + h >= stop.t - 1e-12 * std::max(1.0, std::fabs(stop.t));
      const double h_try = land ? stop.t - t : h;

      for (std::size_t s = 0; s < 7; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
          double acc = run.x[i];
          for (std::size_t j = 0; j < s; ++j) acc += h_try * kA[s][j] * k[j][i];
          tmp[i] = acc;
        }
        run.eval(t + kC[s] * h_try, tmp, k[s], s == 0 ? Approach::FromRight : Approach::FromLeft);
        if (s == 6) x5 = tmp;
      }

      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double diff = 0.0;
        for (std::size_t s = 0; s < 7; ++s) diff += (kB5[s] - kB4[s]) * k[s][i];
        diff *= h_try;
        const double scale = opts.atol + opts.rtol * std::max(std::fabs(run.x[i]), std::fabs(x5[i]));
        sum += (diff / scale) * (diff / scale);
      }
      const double err = n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
      if (!std::isfinite(err))
        throw Error(Errc::NonFinite, "error estimate is not finite at t=" + format_real(t));

      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        run.x.swap(x5);
        t = land ? stop.t : t + h_try;
        ++run.stats().accepted;
        run.record(t, land && stop.sample_hit);
        double next = h_try * (just_rejected ? std::min(factor, 1.0) : factor);
        if (land) next = std::max(next, h); // truncation is not evidence for a smaller step
        h = std::min(next, max_step);
        just_rejected = false;
      } else {
        ++run.stats().rejected;
        h = h_try * factor;
        just_rejected = true;
        if (h < min_step)
          throw Error(Errc::StepUnderflow, "step size " + format_real(h) + " underflowed at t=" + format_real(t));
      }
    }
  }
  return run.take();
}

SimulationResult simulate(const CompiledSystem &sys, const SimOptions &opts, const RunControl &control) {
  validate_options(opts);
  return opts.solver == SolverKind::Rk4 ? simulate_fixed(sys, opts, control)
                                        : simulate_adaptive(sys, opts, control);
}

} // namespace xcosw
