#include "oracles.hpp"

#include "xcosw/error.hpp"
#include "xcosw/solver.hpp"
#include "xcosw/xcos_xml.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace xcosw;
using testkit::make_diagram;

namespace {

// x' = -x realized as CLR 1/(s+1) driven by zero; the CLR state equals its output.
CompiledSystem decay() {
  return compile(make_diagram({{"zero", "CONST_m", {{"value", "0"}}},
                               {"lag", "CLR", {{"num", "1"}, {"den", "1+s"}}},
                               {"y", "CSCOPE", {}}},
                              {{"zero", 0, "lag", 0}, {"lag", 0, "y", 0}}));
}

CompiledSystem lag_system() { return compile(parse_xcos_xml(testkit::read_fixture("lag.xml"))); }

SimOptions fixed(double tf, double dt) {
  SimOptions o;
  o.tf = tf;
  o.dt = dt;
  return o;
}

SimOptions adaptive(double tf, double rtol) {
  SimOptions o;
  o.tf = tf;
  o.solver = SolverKind::Adaptive;
  o.rtol = rtol;
  return o;
}

double max_lag_error(const SimulationResult &r) {
  double worst = 0.0;
  const auto &y = *r.series("scope1");
  for (std::size_t i = 0; i < r.times.size(); ++i)
    worst = std::max(worst, std::fabs(y[i] - (1.0 - std::exp(-2.0 * r.times[i]))));
  return worst;
}

void expect_well_formed(const SimulationResult &r, const SimOptions &o) {
  ASSERT_FALSE(r.times.empty());
  EXPECT_EQ(r.times.front(), o.t0);
  EXPECT_EQ(r.times.back(), o.tf);
  for (std::size_t i = 1; i < r.times.size(); ++i) EXPECT_LT(r.times[i - 1], r.times[i]);
  for (const auto &s : r.signals) EXPECT_EQ(s.values.size(), r.times.size());
}

std::size_t occurrences(const std::vector<double> &times, double t) {
  return static_cast<std::size_t>(std::count_if(times.begin(), times.end(),
                                                [&](double v) { return std::fabs(v - t) <= 1e-12 * std::max(1.0, t); }));
}

} // namespace

TEST(Rk4, OneStepOfDecayMatchesTaylorPolynomial) {
  const CompiledSystem sys = decay();
  const double h = 0.1;
  const double taylor = 1.0 - h + h * h / 2.0 - h * h * h / 6.0 + h * h * h * h / 24.0;
  const auto x = rk4_step(sys, 0.0, h, std::vector<double>{1.0});
  EXPECT_NEAR(x[0], taylor, 1e-15);
  EXPECT_NEAR(x[0], 0.9048375, 1e-7);
}

TEST(Rk4, TrivialCases) {
  const CompiledSystem still = compile(make_diagram({{"zero", "CONST_m", {{"value", "0"}}}, {"i", "INTEGRAL_f", {}}},
                                                    {{"zero", 0, "i", 0}}));
  EXPECT_EQ(rk4_step(still, 0.0, 0.3, std::vector<double>{2.5})[0], 2.5);
  const CompiledSystem ramp = compile(make_diagram({{"one", "CONST_m", {{"value", "1"}}}, {"i", "INTEGRAL_f", {}}},
                                                   {{"one", 0, "i", 0}}));
  EXPECT_EQ(rk4_step(ramp, 0.0, 0.5, std::vector<double>{0.0})[0], 0.5);
}

TEST(Rk4, GlobalErrorIsFourthOrder) {
  const CompiledSystem sys = decay();
  RunControl control;
  control.initial_state = {1.0};
  std::vector<double> errors;
  for (double dt : {0.1, 0.05, 0.025}) {
    const auto r = simulate_fixed(sys, fixed(1.0, dt), control);
    errors.push_back(std::fabs(r.series("y")->back() - std::exp(-1.0)));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
  }
}

TEST(Fixed, LagStepResponse) {
  const SimOptions o = fixed(3.0, 1e-3);
  const auto r = simulate_fixed(lag_system(), o);
  expect_well_formed(r, o);
  EXPECT_EQ(r.times.size(), 3001u);
  EXPECT_LT(max_lag_error(r), 1e-7);
  const auto it = std::find_if(r.times.begin(), r.times.end(), [](double t) { return std::fabs(t - 1.0) < 1e-12; });
  ASSERT_NE(it, r.times.end());
  EXPECT_NEAR((*r.series("scope1"))[static_cast<std::size_t>(it - r.times.begin())], 0.8646647, 1e-7);
  EXPECT_EQ(r.steps.accepted, 3000u);
}

TEST(Fixed, DelayedStepIsExactAtSwitchingTime) {
  const Diagram d = make_diagram({{"step", "STEP_FUNCTION", {{"step_time", "0.3333"}}},
                                  {"i", "INTEGRAL_f", {}},
                                  {"o", "CSCOPE", {}}},
                                 {{"step", 0, "i", 0}, {"i", 0, "o", 0}});
  for (SolverKind kind : {SolverKind::Rk4, SolverKind::Adaptive}) {
    SimOptions o = fixed(1.0, 0.01);
    o.solver = kind;
    const auto r = simulate(compile(d), o);
    EXPECT_EQ(occurrences(r.times, 0.3333), 1u);
    EXPECT_NEAR(r.series("o")->back(), 1.0 - 0.3333, 1e-12);
  }
}

TEST(Fixed, IntegratorOfConstantIsExact) {
  const Diagram d = make_diagram({{"one", "CONST_m", {{"value", "1"}}}, {"i", "INTEGRAL_f", {}}, {"o", "CSCOPE", {}}},
                                 {{"one", 0, "i", 0}, {"i", 0, "o", 0}});
  const auto r = simulate_fixed(compile(d), fixed(2.0, 1e-3));
  EXPECT_NEAR(r.series("o")->back(), 2.0, 1e-12);
}

TEST(Discrete, UnitDelayOnConstant) {
  const Diagram d = make_diagram({{"c", "CONST_m", {{"value", "3"}}},
                                  {"z", "DOLLAR", {{"Ts", "0.5"}, {"x0", "0"}}},
                                  {"o", "CSCOPE", {}}},
                                 {{"c", 0, "z", 0}, {"z", 0, "o", 0}});
  for (SolverKind kind : {SolverKind::Rk4, SolverKind::Adaptive}) {
    SimOptions o = fixed(1.0, 0.1);
    o.solver = kind;
    const auto r = simulate(compile(d), o);
    expect_well_formed(r, o);
    const auto &y = *r.series("o");
    for (std::size_t i = 0; i < r.times.size(); ++i) EXPECT_EQ(y[i], r.times[i] < 0.5 ? 0.0 : 3.0) << r.times[i];
    for (double hit : {0.0, 0.5, 1.0}) EXPECT_EQ(occurrences(r.times, hit), 1u);
  }
}

TEST(Discrete, SampleHoldOfRamp) {
  const Diagram d = make_diagram({{"one", "CONST_m", {{"value", "1"}}},
                                  {"ramp", "INTEGRAL_f", {}},
                                  {"h", "SAMPHOLD", {{"Ts", "0.1"}}},
                                  {"o", "CSCOPE", {}}},
                                 {{"one", 0, "ramp", 0}, {"ramp", 0, "h", 0}, {"h", 0, "o", 0}});
  const auto r = simulate_fixed(compile(d), fixed(0.5, 0.01));
  const auto &y = *r.series("o");
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const double held = 0.1 * std::floor(r.times[i] / 0.1 + 1e-9);
    EXPECT_NEAR(y[i], held, 1e-12) << r.times[i];
  }
}

TEST(Discrete, SampleSchedule) {
  const Diagram one = make_diagram({{"c", "CONST_m", {}}, {"z", "DOLLAR", {{"Ts", "0.5"}}}}, {{"c", 0, "z", 0}});
  EXPECT_EQ(sample_schedule(compile(one), 0.0, 1.0), (std::vector<double>{0.0, 0.5, 1.0}));

  const Diagram two = make_diagram({{"c", "CONST_m", {}},
                                    {"z", "DOLLAR", {{"Ts", "0.5"}}},
                                    {"h", "SAMPHOLD", {{"Ts", "0.75"}}}},
                                   {{"c", 0, "z", 0}, {"c", 0, "h", 0}});
  EXPECT_EQ(sample_schedule(compile(two), 0.0, 1.5), (std::vector<double>{0.0, 0.5, 0.75, 1.0, 1.5}));
  EXPECT_TRUE(sample_schedule(lag_system(), 0.0, 10.0).empty());
}

TEST(Discrete, EveryHitAppearsExactlyOnce) {
  const Diagram d = make_diagram({{"c", "CONST_m", {}},
                                  {"lag", "CLR", {{"num", "1"}, {"den", "1+s"}}},
                                  {"z", "DOLLAR", {{"Ts", "0.3"}}},
                                  {"h", "SAMPHOLD", {{"Ts", "0.07"}}},
                                  {"o1", "CSCOPE", {}},
                                  {"o2", "CSCOPE", {}}},
                                 {{"c", 0, "lag", 0}, {"lag", 0, "z", 0}, {"lag", 0, "h", 0}, {"z", 0, "o1", 0}, {"h", 0, "o2", 0}});
  const CompiledSystem sys = compile(d);
  for (SolverKind kind : {SolverKind::Rk4, SolverKind::Adaptive}) {
    SimOptions o = fixed(2.0, 0.013);
    o.solver = kind;
    const auto r = simulate(sys, o);
    expect_well_formed(r, o);
    for (int k = 0; k * 0.3 <= 2.0 + 1e-12; ++k) EXPECT_EQ(occurrences(r.times, k * 0.3), 1u) << k;
    for (int k = 0; k * 0.07 <= 2.0 + 1e-12; ++k) EXPECT_EQ(occurrences(r.times, k * 0.07), 1u) << k;
  }
}

TEST(Adaptive, LagWithinTolerance) {
  const SimOptions o = adaptive(3.0, 1e-6);
  const auto r = simulate_adaptive(lag_system(), o);
  expect_well_formed(r, o);
  EXPECT_LT(max_lag_error(r), 1e-5);
  EXPECT_LT(r.steps.accepted, 3000u);
}

TEST(Adaptive, TighterToleranceReducesError) {
  const double loose = max_lag_error(simulate_adaptive(lag_system(), adaptive(3.0, 1e-4)));
  const double tight = max_lag_error(simulate_adaptive(lag_system(), adaptive(3.0, 1e-6)));
  EXPECT_GE(loose / tight, 10.0) << loose << " " << tight;
}

TEST(Adaptive, ConstantSystemTakesFewSteps) {
  const Diagram d = make_diagram({{"zero", "CONST_m", {{"value", "0"}}}, {"i", "INTEGRAL_f", {{"x0", "4"}}}, {"o", "CSCOPE", {}}},
                                 {{"zero", 0, "i", 0}, {"i", 0, "o", 0}});
  const auto r = simulate_adaptive(compile(d), adaptive(10.0, 1e-6));
  EXPECT_LE(r.steps.accepted, 15u);
  for (double v : *r.series("o")) EXPECT_EQ(v, 4.0);
}

TEST(Adaptive, StiffSystemUnderflows) {
  const Diagram d = make_diagram({{"one", "CONST_m", {}}, {"fast", "CLR", {{"num", "1"}, {"den", "1+1e-16*s"}}}},
                                 {{"one", 0, "fast", 0}});
  SimOptions o = adaptive(10.0, 1e-6);
  try {
    simulate_adaptive(compile(d), o);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::StepUnderflow);
  }
}

TEST(Solver, Linearity) {
  auto motor_with_amplitude = [](const std::string &v) {
    Diagram d = parse_xcos_xml(testkit::read_fixture("dc_motor.xml"));
    d.find_block("step")->params["final"] = v;
    return compile(d);
  };
  const auto unit = simulate(motor_with_amplitude("1"), fixed(2.0, 1e-3));
  const auto scaled = simulate(motor_with_amplitude("-3.5"), fixed(2.0, 1e-3));
  ASSERT_EQ(unit.times, scaled.times);
  for (std::size_t i = 0; i < unit.times.size(); ++i)
    EXPECT_NEAR((*scaled.series("omega"))[i], -3.5 * (*unit.series("omega"))[i], 1e-12);
}

TEST(Solver, EquilibriumIsPreserved) {
  const CompiledSystem sys = compile(parse_xcos_xml(testkit::read_fixture("dc_motor.xml")));
  // Steady state of the hand-assembled canonical model: A x + B = 0.
  Eigen::Matrix2d a;
  a << -2.0, -1.0, 0.02, -10.0;
  const Eigen::Vector2d xs = a.colPivHouseholderQr().solve(-Eigen::Vector2d(1.0, 0.0));
  RunControl control;
  control.initial_state.assign(2, 0.0);
  control.initial_state[sys.layout().at("elec").offset] = xs(0);
  control.initial_state[sys.layout().at("mech").offset] = xs(1);
  const double w = 100.0 * xs(1);
  for (SolverKind kind : {SolverKind::Rk4, SolverKind::Adaptive}) {
    SimOptions o = fixed(10.0, 1e-3);
    o.solver = kind;
    const auto r = simulate(sys, o, control);
    for (double v : *r.series("omega")) EXPECT_NEAR(v, w, 1e-9);
  }
}

TEST(Solver, FixedAndAdaptiveAgree) {
  Diagram d = parse_xcos_xml(testkit::read_fixture("dc_motor.xml"));
  // A sampler on a side branch puts common points on both time grids.
  d.blocks.push_back({.id = "tap", .kind = "DOLLAR", .params = {{"Ts", "0.25"}, {"x0", "0"}}, .n_in = 1, .n_out = 1});
  d.links.push_back({"l_tap", {"mech", 0}, {"tap", 0}, {}});
  const CompiledSystem sys = compile(d);
  SimOptions fo = fixed(5.0, 1e-3);
  SimOptions ao = adaptive(5.0, 1e-6);
  const auto rf = simulate(sys, fo);
  const auto ra = simulate(sys, ao);
  std::size_t compared = 0;
  for (std::size_t i = 0, j = 0; i < rf.times.size() && j < ra.times.size();) {
    if (rf.times[i] < ra.times[j]) {
      ++i;
    } else if (ra.times[j] < rf.times[i]) {
      ++j;
    } else {
      const double yf = (*rf.series("omega"))[i], ya = (*ra.series("omega"))[j];
      EXPECT_LE(std::fabs(yf - ya), 10.0 * (ao.atol + ao.rtol * std::fabs(yf))) << rf.times[i];
      ++compared;
      ++i;
      ++j;
    }
  }
  EXPECT_GE(compared, 21u);
}

TEST(Solver, ErrorsAndLimits) {
  const Diagram blowup = make_diagram({{"big", "CONST_m", {{"value", "1e308"}}}, {"g", "GAINBLK", {{"gain", "10"}}}, {"o", "CSCOPE", {}}},
                                      {{"big", 0, "g", 0}, {"g", 0, "o", 0}});
  try {
    simulate(compile(blowup), fixed(1.0, 0.1));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::NonFinite);
    EXPECT_NE(std::string(e.what()).find("g"), std::string::npos);
  }

  RunControl late;
  late.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  try {
    simulate(lag_system(), fixed(3.0, 1e-3), late);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::Timeout);
  }

  SimOptions bad = fixed(1.0, -1.0);
  EXPECT_THROW(simulate(lag_system(), bad), Error);
  bad = fixed(0.0, 0.1);
  EXPECT_THROW(simulate(lag_system(), bad), Error);
}

TEST(Solver, NonZeroStartTime) {
  SimOptions o = fixed(3.0, 1e-3);
  o.t0 = 1.0;
  const auto r = simulate(lag_system(), o);
  expect_well_formed(r, o);
  // Step at t=0 is already on; the lag starts from rest at t0.
  EXPECT_NEAR(r.series("scope1")->back(), 1.0 - std::exp(-4.0), 1e-7);
}
