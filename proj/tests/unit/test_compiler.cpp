#include "oracles.hpp"

#include "xcosw/compiler.hpp"
#include "xcosw/xcos_xml.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

using namespace xcosw;
using testkit::BlockDef;
using testkit::make_diagram;

namespace {

std::vector<std::string> codes(const std::vector<Diagnostic> &ds) {
  std::vector<std::string> out;
  for (const auto &d : ds) out.push_back(d.code);
  return out;
}

bool has_cycle_dfs(const DirectedGraph &g) {
  std::map<std::string, int> color;
  std::function<bool(const std::string &)> visit = [&](const std::string &u) {
    color[u] = 1;
    for (const auto &v : g.successors(u)) {
      if (color[v] == 1) return true;
      if (color[v] == 0 && visit(v)) return true;
    }
    color[u] = 2;
    return false;
  };
  for (const auto &n : g.nodes())
    if (color[n] == 0 && visit(n)) return true;
  return false;
}

Eigen::VectorXd global_derivative(const CompiledSystem &sys, double t, const Eigen::VectorXd &x) {
  std::vector<double> xs(x.data(), x.data() + x.size()), dx(sys.state_dim()), signals(sys.signal_count());
  sys.derivative(t, xs, sys.initial_discrete_state(), signals, dx);
  return Eigen::Map<Eigen::VectorXd>(dx.data(), static_cast<Eigen::Index>(dx.size()));
}

} // namespace

TEST(Compiler, FeedthroughGraphExamples) {
  const Diagram integ = make_diagram({{"step", "STEP_FUNCTION", {}}, {"int", "INTEGRAL_f", {}}, {"scope", "CSCOPE", {}}},
                                     {{"step", 0, "int", 0}, {"int", 0, "scope", 0}});
  const DirectedGraph g1 = feedthrough_graph(integ);
  EXPECT_FALSE(g1.has_edge("step", "int"));
  EXPECT_TRUE(g1.has_edge("int", "scope"));
  EXPECT_EQ(g1.edge_count(), 1u);

  const Diagram gain = make_diagram({{"step", "STEP_FUNCTION", {}}, {"gain", "GAINBLK", {}}, {"scope", "CSCOPE", {}}},
                                    {{"step", 0, "gain", 0}, {"gain", 0, "scope", 0}});
  const DirectedGraph g2 = feedthrough_graph(gain);
  EXPECT_TRUE(g2.has_edge("step", "gain"));
  EXPECT_TRUE(g2.has_edge("gain", "scope"));

  EXPECT_TRUE(feedthrough_graph(Diagram{}).nodes().empty());

  Diagram opaque;
  opaque.blocks.push_back({.id = "x", .kind = "MYSTERY"});
  EXPECT_THROW(feedthrough_graph(opaque), Error);
}

TEST(Compiler, ScheduleExamples) {
  DirectedGraph chain;
  chain.add_edge("c", "b");
  chain.add_edge("b", "a");
  EXPECT_EQ(schedule(chain), (std::vector<std::string>{"c", "b", "a"}));

  DirectedGraph two;
  two.add_edge("b1", "b2");
  two.add_edge("a1", "a2");
  two.add_node("0z");
  const auto order = schedule(two);
  EXPECT_EQ(order, (std::vector<std::string>{"0z", "a1", "a2", "b1", "b2"}));
  for (int i = 0; i < 20; ++i) EXPECT_EQ(schedule(two), order);

  DirectedGraph cyc;
  cyc.add_edge("a", "b");
  cyc.add_edge("b", "a");
  cyc.add_edge("b", "c");
  try {
    schedule(cyc);
    FAIL();
  } catch (const LoopError &e) {
    EXPECT_EQ(e.code(), Errc::AlgebraicLoop);
    EXPECT_EQ(e.nodes(), (std::vector<std::string>{"a", "b"}));
  }
}

TEST(Compiler, ScheduleRespectsEdgesOnRandomGraphs) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(rng() % 1000) + "_" + std::to_string(i));
    DirectedGraph g;
    for (const auto &id : ids) g.add_node(id);
    for (std::size_t e = 0, m = rng() % (2 * n + 1); e < m; ++e) {
      std::size_t a = rng() % n, b = rng() % n;
      if (trial % 2 == 0 && a >= b) continue; // acyclic half
      g.add_edge(ids[a], ids[b]);
    }
    const bool cyclic = has_cycle_dfs(g);
    EXPECT_EQ(!g.cyclic_components().empty(), cyclic);
    if (cyclic) {
      EXPECT_THROW(schedule(g), LoopError);
      continue;
    }
    const auto order = schedule(g);
    ASSERT_EQ(order.size(), n);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto &u : g.nodes())
      for (const auto &v : g.successors(u)) EXPECT_LT(pos[u], pos[v]);
  }
}

TEST(Compiler, ValidateReportsUnsetParameters) {
  const auto ds = validate(parse_xcos_xml(testkit::read_fixture("dc_motor_unset.xml")));
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(codes(ds), (std::vector<std::string>{"UNSET_PARAM", "UNSET_PARAM"}));
  EXPECT_EQ(ds[0].blocks, std::vector<std::string>{"K"});
  EXPECT_EQ(ds[1].blocks, std::vector<std::string>{"elec"});
  EXPECT_TRUE(has_errors(ds));
  EXPECT_EQ(format_diagnostic(ds[0]).rfind("error UNSET_PARAM K: ", 0), 0u);
}

TEST(Compiler, ValidateCleanAndBrokenModels) {
  EXPECT_TRUE(validate(parse_xcos_xml(testkit::read_fixture("dc_motor.xml"))).empty());
  EXPECT_TRUE(validate(Diagram{}).empty());

  const auto loop = validate(parse_xcos_xml(testkit::read_fixture("gain_loop.xml")));
  ASSERT_EQ(loop.size(), 1u);
  EXPECT_EQ(loop[0].code, "ALGEBRAIC_LOOP");
  EXPECT_EQ(loop[0].blocks, (std::vector<std::string>{"g", "sum"}));

  const Diagram dangling = make_diagram({{"g", "GAINBLK", {}}, {"s", "SUMMATION", {}}}, {{"g", 0, "s", 1}});
  const auto dd = validate(dangling);
  EXPECT_EQ(codes(dd), (std::vector<std::string>{"DANGLING_INPUT", "DANGLING_INPUT"}));

  Diagram unknown;
  unknown.blocks.push_back({.id = "x", .kind = "MYSTERY"});
  EXPECT_EQ(codes(validate(unknown)), std::vector<std::string>{"UNKNOWN_KIND"});

  const Diagram bad = make_diagram({{"c", "CONST_m", {{"value", "1+"}}}, {"o", "CSCOPE", {}}}, {{"c", 0, "o", 0}});
  EXPECT_EQ(codes(validate(bad)), std::vector<std::string>{"BAD_PARAM"});

  const auto json = diagnostics_to_json(loop);
  EXPECT_EQ(json[0]["code"], "ALGEBRAIC_LOOP");
  EXPECT_EQ(json[0]["severity"], "error");
}

TEST(Compiler, CompileLayouts) {
  const CompiledSystem motor = compile(parse_xcos_xml(testkit::read_fixture("dc_motor.xml")));
  EXPECT_EQ(motor.state_dim(), 2u);
  ASSERT_EQ(motor.probes().size(), 1u);
  EXPECT_EQ(motor.probes()[0].id, "omega");

  const Diagram single = make_diagram({{"c", "CONST_m", {}}, {"i", "INTEGRAL_f", {}}, {"o", "CSCOPE", {}}},
                                      {{"c", 0, "i", 0}, {"i", 0, "o", 0}});
  const CompiledSystem sys = compile(single);
  EXPECT_EQ(sys.state_dim(), 1u);
  EXPECT_EQ(sys.layout().at("i"), (StateSlice{0, 1}));

  try {
    compile(parse_xcos_xml(testkit::read_fixture("dc_motor_unset.xml")));
    FAIL();
  } catch (const NotValidatedError &e) {
    EXPECT_EQ(e.code(), Errc::NotValidated);
    EXPECT_EQ(e.diagnostics().size(), 2u);
  }
}

TEST(Compiler, SlicesPartitionStateAndOrderIsTopological) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    testkit::RandomDiagramOptions opts;
    opts.opaque_fraction = 0.0;
    const Diagram d = testkit::random_diagram(rng, opts);
    if (has_errors(validate(d))) continue;
    const CompiledSystem a = compile(d);
    const CompiledSystem b = compile(d);
    EXPECT_EQ(a.eval_order(), b.eval_order());
    EXPECT_EQ(a.layout(), b.layout());
    std::vector<bool> covered(a.state_dim(), false);
    for (const auto &[id, slice] : a.layout())
      for (std::size_t i = slice.offset; i < slice.offset + slice.size; ++i) {
        EXPECT_FALSE(covered[i]);
        covered[i] = true;
      }
    EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](bool c) { return c; }));
    const DirectedGraph g = feedthrough_graph(d);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < a.eval_order().size(); ++i) pos[a.eval_order()[i]] = i;
    for (const auto &u : g.nodes())
      for (const auto &v : g.successors(u)) EXPECT_LT(pos.at(u), pos.at(v));
  }
}

TEST(Compiler, LoopsThroughStateCompileAllFeedthroughLoopsDoNot) {
  std::mt19937_64 rng(77);
  const std::vector<BlockDef> feedthrough_kinds{{"", "GAINBLK", {{"gain", "0.5"}}},
                                                {"", "CLR", {{"num", "s"}, {"den", "1+s"}}}};
  const std::vector<BlockDef> breaking_kinds{{"", "INTEGRAL_f", {}},
                                             {"", "CLR", {{"num", "1"}, {"den", "1+s"}}},
                                             {"", "DOLLAR", {{"Ts", "0.1"}}}};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const bool broken = trial % 2 == 1;
    const std::size_t breaker = rng() % n;
    std::vector<BlockDef> blocks;
    std::vector<testkit::Wire> wires;
    for (std::size_t i = 0; i < n; ++i) {
      BlockDef def = broken && i == breaker ? breaking_kinds[rng() % breaking_kinds.size()]
                                            : feedthrough_kinds[rng() % feedthrough_kinds.size()];
      def.id = "r" + std::to_string(i);
      blocks.push_back(def);
      wires.push_back({def.id, 0, "r" + std::to_string((i + 1) % n), 0});
    }
    blocks.push_back({"probe", "CSCOPE", {}});
    wires.push_back({"r0", 0, "probe", 0});
    const Diagram d = make_diagram(blocks, wires);
    const auto ds = validate(d);
    if (broken) {
      EXPECT_TRUE(ds.empty()) << format_diagnostic(ds.front());
      EXPECT_NO_THROW(compile(d));
    } else {
      ASSERT_EQ(ds.size(), 1u);
      EXPECT_EQ(ds[0].code, "ALGEBRAIC_LOOP");
      EXPECT_EQ(ds[0].blocks.size(), n);
      EXPECT_THROW(compile(d), NotValidatedError);
    }
  }
}

TEST(Compiler, DerivativeMatchesHandAssembledDcMotor) {
  const CompiledSystem sys = compile(parse_xcos_xml(testkit::read_fixture("dc_motor.xml")));
  // Canonical states: i = 2 x_e (1/(0.5 s + 1)), w = 100 x_m (1/(0.01 s + 0.1)).
  // x_e' = -2 x_e + V - 0.01 w, x_m' = -10 x_m + 0.01 i.
  Eigen::Matrix2d a;
  a << -2.0, -1.0, 0.02, -10.0;
  const Eigen::Vector2d b(1.0, 0.0);
  const std::size_t ie = sys.layout().at("elec").offset, im = sys.layout().at("mech").offset;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d phys(u(rng), u(rng));
    Eigen::VectorXd x(2);
    x(static_cast<Eigen::Index>(ie)) = phys(0);
    x(static_cast<Eigen::Index>(im)) = phys(1);
    const Eigen::VectorXd dx = global_derivative(sys, 1.0, x);
    const Eigen::Vector2d expected = a * phys + b * 1.0;
    EXPECT_NEAR(dx(static_cast<Eigen::Index>(ie)), expected(0), 1e-12);
    EXPECT_NEAR(dx(static_cast<Eigen::Index>(im)), expected(1), 1e-12);
  }
}

TEST(Compiler, DerivativeMatchesHandAssembledThreeStateLoop) {
  const Diagram d = make_diagram({{"one", "CONST_m", {{"value", "1"}}},
                                  {"sum", "SUMMATION", {{"signs", "[+1;-1]"}}},
                                  {"tf", "CLR", {{"num", "s+1"}, {"den", "s^2+3*s+2"}}},
                                  {"int", "INTEGRAL_f", {}},
                                  {"half", "GAINBLK", {{"gain", "0.5"}}},
                                  {"o", "CSCOPE", {}}},
                                 {{"one", 0, "sum", 0},
                                  {"sum", 0, "tf", 0},
                                  {"tf", 0, "int", 0},
                                  {"int", 0, "half", 0},
                                  {"half", 0, "sum", 1},
                                  {"int", 0, "o", 0}});
  const CompiledSystem sys = compile(d);
  ASSERT_EQ(sys.state_dim(), 3u);
  Eigen::Matrix3d a;
  a << 0, 1, 0, -2, -3, -0.5, 1, 1, 0;
  const Eigen::Vector3d b(0, 1, 0);
  const std::size_t tf = sys.layout().at("tf").offset, in = sys.layout().at("int").offset;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d phys(u(rng), u(rng), u(rng));
    Eigen::VectorXd x(3);
    x(static_cast<Eigen::Index>(tf)) = phys(0);
    x(static_cast<Eigen::Index>(tf + 1)) = phys(1);
    x(static_cast<Eigen::Index>(in)) = phys(2);
    const Eigen::VectorXd dx = global_derivative(sys, 0.0, x);
    const Eigen::Vector3d expected = a * phys + b;
    EXPECT_NEAR(dx(static_cast<Eigen::Index>(tf)), expected(0), 1e-12);
    EXPECT_NEAR(dx(static_cast<Eigen::Index>(tf + 1)), expected(1), 1e-12);
    EXPECT_NEAR(dx(static_cast<Eigen::Index>(in)), expected(2), 1e-12);
  }
}
