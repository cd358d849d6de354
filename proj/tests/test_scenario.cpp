#include <filesystem>
#include <string>

#include "doctest.h"
#include "shapebots/error.hpp"
#include "shapebots/scenario.hpp"

using namespace shapebots;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string schema_path(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<accepted>";
}

json minimal() {
  return json::parse(R"({"robots": [[100, 100], [300, 100, 90]],
                         "shape": {"type": "lines", "segments": [[[400, 400], [500, 400]]]}})");
}

}  // namespace

TEST_CASE("minimal document") {
  const Scenario s = parse_scenario(minimal());
  CHECK(s.name == "scenario");
  REQUIRE(s.robots.size() == 2);
  CHECK(s.robots[1].pose.theta == doctest::Approx(deg_to_rad(90)));
  CHECK(s.robots[0].units.size() == 2);
  CHECK(s.frames.size() == 1);
  CHECK(std::holds_alternative<DrawnLines>(s.frames[0]));
  CHECK(s.time_limit == 120);
}

TEST_CASE("top-level fields") {
  json d = minimal();
  d["name"] = "t";
  d["seed"] = 42;
  d["time_limit"] = 30;
  d["actuators"] = {"vertical"};
  d["params"] = {{"v_max", 120}, {"pos_threshold", 8}};
  d["objects"] = {{{"center", {600, 300}}, {"radius", 20}}, {{"center", {800, 300}}, {"radius", 30}, {"pushable", false}}};
  const Scenario s = parse_scenario(d);
  CHECK(s.name == "t");
  CHECK(s.params.seed == 42);
  CHECK(s.params.v_max == 120);
  CHECK(s.params.pos_threshold == 8);
  CHECK(s.time_limit == 30);
  CHECK(s.robots[0].units.size() == 1);
  CHECK(s.robots[0].units[0].mount == Mount::Vertical);
  REQUIRE(s.objects.size() == 2);
  CHECK(s.objects[0].pushable);
  CHECK_FALSE(s.objects[1].pushable);
}

TEST_CASE("schema errors carry the JSON path") {
  json d = minimal();
  d["name"] = 3;
  CHECK(schema_path(d) == "$.name");

  d = minimal();
  d["colour"] = "red";
  CHECK(schema_path(d) == "$.colour");

  d = minimal();
  d.erase("robots");
  CHECK(schema_path(d) == "$.robots");

  d = minimal();
  d["robots"][1] = {100, "y"};
  CHECK(schema_path(d) == "$.robots[1][1]");

  d = minimal();
  d["robots"][0] = {5, 5};
  CHECK(schema_path(d) == "$.robots[0]");

  d = minimal();
  d["seed"] = -1;
  CHECK(schema_path(d) == "$.seed");

  d = minimal();
  d["shape"] = {{"type", "blob"}};
  CHECK(schema_path(d) == "$.shape.type");

  d = minimal();
  d["shape"] = {{"type", "rectangle"}, {"width", 100}, {"height", -1}, {"center", {500, 300}}};
  CHECK(schema_path(d) == "$.shape.height");

  d = minimal();
  d["shape"] = {{"type", "data"}, {"anchors", {{0, 0}, {1, 1}}}, {"values", {1}}};
  CHECK(schema_path(d) == "$.shape.values");

  d = minimal();
  d["keyframes"] = {{"frames", json::array()}};
  CHECK(schema_path(d) == "$");  // shape and keyframes together

  d = minimal();
  d["actuators"] = {"diagonal"};
  CHECK(schema_path(d) == "$.actuators[0]");

  d = minimal();
  d["script"] = {{{"at", 1}, {"drag", {{"id", 0}, {"pose", {1, 2}}}}, {"remove", 1}}};
  CHECK(schema_path(d) == "$.script[0]");

  d = minimal();
  d["script"] = {{{"at", 1}, {"drag", {{"id", "a"}, {"pose", {1, 2}}}}}};
  CHECK(schema_path(d) == "$.script[0].drag.id");

  d = minimal();
  d["shape"] = "nope";
  CHECK(schema_path(d) == "$.shape");

  d = minimal();
  d["robots"] = {{"count", 500}, {"layout", "grid"}};
  CHECK(schema_path(d) == "$.robots");

  d = minimal();
  d["robots"] = {{"count", 3}, {"layout", "random"}, {"seed", -2}};
  CHECK(schema_path(d) == "$.robots.seed");

  d = minimal();
  d["params"] = {{"warp", 9}};
  CHECK(schema_path(d) == "$.params.warp");
}

TEST_CASE("generated robot layouts") {
  json d = minimal();
  d["robots"] = {{"count", 5}, {"layout", "grid"}, {"spacing", 100}, {"region", {{100, 100}, {1000, 600}}}};
  Scenario s = parse_scenario(d);
  REQUIRE(s.robots.size() == 5);
  CHECK(s.robots[0].pose.position() == Vec2{100, 100});
  CHECK(s.robots[1].pose.position() == Vec2{200, 100});

  d["robots"] = {{"count", 6}, {"layout", "random"}, {"seed", 8}};
  s = parse_scenario(d);
  REQUIRE(s.robots.size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j)
      CHECK(distance(s.robots[i].pose.position(), s.robots[j].pose.position()) >= 100);
  CHECK(parse_scenario(d).robots[3].pose == s.robots[3].pose);
}

TEST_CASE("grid and random layouts") {
  const auto g = grid_layout(7, {0, 0}, {250, 250}, 100);
  REQUIRE(g.size() == 7);
  CHECK(g[2].position() == Vec2{200, 0});
  CHECK(g[3].position() == Vec2{0, 100});
  CHECK_THROWS_AS(grid_layout(10, {0, 0}, {250, 250}, 100), InvalidArgument);

  SimParams p;
  const auto a = random_layout(20, p, 5);
  const auto b = random_layout(20, p, 5);
  CHECK(a == b);
  CHECK(a != random_layout(20, p, 6));
  for (const Pose& q : a) {
    CHECK(q.x >= 50);
    CHECK(q.y >= 50);
    CHECK(q.x <= p.world_width - 50);
    CHECK(q.y <= p.world_height - 50);
  }
  CHECK_THROWS_AS(random_layout(500, p, 1), InvalidArgument);
}

TEST_CASE("keyframes, named shapes and scripts") {
  const json d = json::parse(R"({
    "robots": {"count": 4},
    "shapes": {"box": {"type": "rectangle", "width": 200, "height": 100, "center": [500, 400]}},
    "keyframes": {"frames": ["box", {"type": "fence", "center": [600, 400], "radius": 120, "n": 4}],
                  "hold": 2, "loop": true},
    "script": [{"at": 9, "remove": 1}, {"at": 3, "place": [900, 600]}, {"at": 5, "shape": "box"}]
  })");
  const Scenario s = parse_scenario(d);
  CHECK(s.frames.size() == 2);
  CHECK(std::holds_alternative<Rectangle>(s.frames[0]));
  CHECK(s.hold_time == 2);
  CHECK(s.loop);
  REQUIRE(s.script.size() == 3);
  CHECK(s.script[0].at == 3);
  CHECK(std::holds_alternative<ScriptAction::Place>(s.script[0].action));
  CHECK(std::holds_alternative<ScriptAction::SetShape>(s.script[1].action));
  CHECK(std::holds_alternative<ScriptAction::Remove>(s.script[2].action));
}

TEST_CASE("shape_to_json round-trips through parse_shape") {
  const std::vector<json> shapes{
      json::parse(R"({"type": "lines", "segments": [[[0, 0], [10, 0]]]})"),
      json::parse(R"({"type": "sine", "amplitude": 100, "wavelength": 500, "n": 6, "origin": [100, 200]})"),
      json::parse(R"({"type": "rectangle", "width": 80, "height": 40, "center": [1, 2]})"),
      json::parse(R"({"type": "fence", "center": [300, 300], "radius": 90, "n": 5, "height": 120})"),
      json::parse(R"({"type": "data", "anchors": [[0, 0], [50, 0]], "values": [3, 4]})"),
      json::parse(R"({"type": "targets", "targets": [{"pose": [5, 6, 45], "extension": 80, "mount": "curved",
                      "strip_delta": 12}]})"),
      json::parse(R"({"type": "contours", "mode": "point", "contours": [{"points": [[0, 0], [9, 0], [9, 9]],
                      "closed": true}]})"),
  };
  for (const json& j : shapes) {
    const json once = shape_to_json(parse_shape(j));
    CHECK(shape_to_json(parse_shape(once)) == once);
  }
  // SVG text comes back as explicit contours.
  const json svg = json::parse(R"({"type": "svg", "text": "<svg><rect x='0' y='0' width='10' height='10'/></svg>",
                                   "scale": 10, "center": [500, 300]})");
  const json out = shape_to_json(parse_shape(svg));
  CHECK(out["type"] == "contours");
  const auto c = std::get<SvgContour>(parse_shape(out));
  REQUIRE(c.contours.size() == 1);
  CHECK(c.contours[0].points().front() == Vec2{450, 250});
}

TEST_CASE("svg shapes resolve files against the scenario directory") {
  const json j = {{"type", "svg"}, {"file", "corpus/heart.svg"}};
  const ShapeSpec s = parse_shape(j, SHAPEBOTS_TEST_DATA);
  CHECK_FALSE(std::get<SvgContour>(s).contours.empty());
  CHECK_THROWS_AS(parse_shape(j, "/nonexistent"), fs::filesystem_error);
  CHECK_THROWS_AS(parse_shape({{"type", "svg"}, {"text", "<svg><path d='M0 0 A 5 5 0 0 1 10 0'/></svg>"}}),
                  UnsupportedFeature);
}

TEST_CASE("load_scenario: missing file and bad JSON") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/s.json"), fs::filesystem_error);
  const fs::path tmp = fs::temp_directory_path() / "shapebots_bad_scenario.json";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    std::fputs("{\"robots\": [", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_scenario(tmp), ParseError);
  fs::remove(tmp);
}

TEST_CASE("every shipped scenario parses and its shapes compile") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(SHAPEBOTS_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const Scenario s = load_scenario(entry.path());
    CHECK_FALSE(s.robots.empty());
    CHECK_NOTHROW(sequence_keyframes(s.frames, s.robots.size(), s.hold_time));
    ++seen;
  }
  CHECK(seen >= 5);
}

TEST_CASE("run_scenario: the rectangle drag settles after a Move") {
  const Scenario s = load_scenario(fs::path(SHAPEBOTS_SCENARIO_DIR) / "rectangle_drag.json");
  const RunResult r = run_scenario(s);
  CHECK(r.metrics.completed);
  bool moved = false;
  for (const auto& e : r.metrics.events) moved |= e.input && e.input->kind == InputKind::Move;
  CHECK(moved);
  CHECK_FALSE(r.log.records().empty());
  CHECK(r.log.last_frame().size() == 4);
  CHECK(r.reference.size() == 1);

  const json m = metrics_to_json(r.metrics, s);
  CHECK(m["v"] == 1);
  CHECK(m["scenario"] == "rectangle-drag");
  CHECK(m["robots"] == 4);
  CHECK(m["completed"] == true);
  CHECK(m["coverage_error"].is_number());
  CHECK(m["events"].is_array());
}

TEST_CASE("run_scenario stops at the time limit") {
  json d = minimal();
  d["time_limit"] = 0.5;
  const RunResult r = run_scenario(parse_scenario(d));
  CHECK_FALSE(r.metrics.completed);
  CHECK(r.metrics.sim_time == doctest::Approx(0.5).epsilon(0.02));
}
