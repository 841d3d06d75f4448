#include "oracles.hpp"

#include "xcosw/error.hpp"
#include "xcosw/interchange_json.hpp"
#include "xcosw/xcos_xml.hpp"

#include <gtest/gtest.h>

using namespace xcosw;
using nlohmann::json;

namespace {

std::string schema_path(std::string_view doc) {
  try {
    from_interchange_json(doc);
  } catch (const SchemaError &e) {
    EXPECT_EQ(e.code(), Errc::SchemaViolation);
    return e.path();
  }
  ADD_FAILURE() << "accepted: " << doc;
  return {};
}

} // namespace

TEST(InterchangeJson, EmptyDiagram) {
  const json j = json::parse(to_interchange_json(Diagram{}));
  EXPECT_EQ(j["format"], 1);
  EXPECT_EQ(j["title"], "");
  EXPECT_EQ(j["blocks"], json::array());
  EXPECT_EQ(j["links"], json::array());
  EXPECT_EQ(from_interchange_json(R"({"title":"","blocks":[],"links":[]})"), Diagram{});
}

TEST(InterchangeJson, DcMotorRoundTrip) {
  const Diagram d = parse_xcos_xml(testkit::read_fixture("dc_motor.xml"));
  EXPECT_EQ(canonicalize(from_interchange_json(to_interchange_json(d))), canonicalize(d));
  EXPECT_EQ(canonicalize(from_interchange_json(testkit::read_fixture("dc_motor.json"))), canonicalize(d));
}

TEST(InterchangeJson, DefaultsAreFilled) {
  const Diagram d = from_interchange_json(R"({"blocks":[{"id":"g","kind":"GAINBLK"}],"links":[]})");
  const Block &b = d.blocks.at(0);
  EXPECT_EQ(b.params.at("gain"), "1");
  EXPECT_EQ(b.n_in, 1u);
  EXPECT_EQ(b.geometry, Geometry{});
}

TEST(InterchangeJson, SchemaViolationsNameTheField) {
  EXPECT_EQ(schema_path(R"({"blocks":[{"id":"g","kind":"GAINBLK"}],
      "links":[{"id":"l","src":{"block":"g","port":0},"dst":{"block":"missing","port":0}}]})"),
            "$.links[0].dst.block");
  EXPECT_EQ(schema_path(R"({"blocks":[{"id":"g","kind":"GAINBLK","n_in":2}],"links":[]})"), "$.blocks[0].n_in");
  EXPECT_EQ(schema_path(R"({"blocks":[{"id":"g","kind":"GAINBLK","params":{"gain":2}}],"links":[]})"),
            "$.blocks[0].params.gain");
  EXPECT_EQ(schema_path(R"({"blocks":[{"id":"g","kind":"GAINBLK","colour":"red"}],"links":[]})"), "$.blocks[0].colour");
  EXPECT_EQ(schema_path(R"({"format":2,"blocks":[],"links":[]})"), "$.format");
  EXPECT_EQ(schema_path(R"({"links":[]})"), "$.blocks");
  EXPECT_EQ(schema_path(R"([1,2])"), "$");
  EXPECT_EQ(schema_path(R"({"blocks":[)"), "$");
  EXPECT_EQ(schema_path(R"({"blocks":[{"id":"g","kind":"GAINBLK"},{"id":"c","kind":"CONST_m"},{"id":"d","kind":"CONST_m"}],
      "links":[{"id":"l1","src":{"block":"c","port":0},"dst":{"block":"g","port":0}},
               {"id":"l2","src":{"block":"d","port":0},"dst":{"block":"g","port":0}}]})"),
            "$.links[1].dst");
}

TEST(InterchangeJson, OpaqueBlocksKeepArity) {
  const Diagram d = from_interchange_json(R"({"blocks":[
      {"id":"x","kind":"MYSTERY","n_in":3,"n_out":0},
      {"id":"y","kind":"MYSTERY2"},
      {"id":"c","kind":"CONST_m"}],
    "links":[{"id":"l","src":{"block":"c","port":0},"dst":{"block":"y","port":1}}]})");
  EXPECT_EQ(d.find_block("x")->n_in, 3u);
  EXPECT_EQ(d.find_block("y")->n_in, 2u);
  EXPECT_EQ(canonicalize(parse_xcos_xml(serialize_xcos_xml(d))), canonicalize(d));
}

TEST(InterchangeJson, RandomDiagramsRoundTrip) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const Diagram d = testkit::random_diagram(rng);
    const std::string text = to_interchange_json(d);
    Diagram back;
    ASSERT_NO_THROW(back = from_interchange_json(text)) << text;
    ASSERT_EQ(canonicalize(back), canonicalize(d)) << text;
  }
}

TEST(InterchangeJson, OptionsRoundTrip) {
  SimOptions o;
  o.t0 = 0.5;
  o.tf = 3.25;
  o.solver = SolverKind::Adaptive;
  o.max_step = 0.01;
  const json j = options_to_json(o);
  const SimOptions back = options_from_json(j, SimOptions{}, "$.options");
  EXPECT_EQ(back.t0, o.t0);
  EXPECT_EQ(back.tf, o.tf);
  EXPECT_EQ(back.solver, o.solver);
  EXPECT_EQ(back.max_step, o.max_step);
  const SimOptions partial = options_from_json(json{{"tf", 2}}, o, "$.options");
  EXPECT_EQ(partial.tf, 2.0);
  EXPECT_EQ(partial.solver, SolverKind::Adaptive);
  EXPECT_THROW(options_from_json(json{{"solver", "euler"}}, o, "$.options"), SchemaError);
  EXPECT_THROW(options_from_json(json{{"speed", 1}}, o, "$.options"), SchemaError);
}

TEST(InterchangeJson, FuzzedBytesNeverCrash) {
  std::mt19937_64 rng(29);
  const std::string seed = testkit::read_fixture("dc_motor.json");
  for (int i = 0; i < 3000; ++i) {
    std::string doc = seed;
    for (int e = 0, n = 1 + static_cast<int>(rng() % 6); e < n; ++e) {
      const std::size_t pos = rng() % doc.size();
      if (rng() % 2)
        doc[pos] = "{}[]\",:0-eE.nt \\\xc3"[rng() % 18];
      else
        doc.erase(pos, rng() % 8);
      if (doc.empty()) doc = "{";
    }
    try {
      check_invariants(from_interchange_json(doc));
    } catch (const Error &) {
    }
  }
}
