#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "shapebots/engine.hpp"
#include "shapebots/params.hpp"
#include "shapebots/shape_compiler.hpp"
#include "shapebots/trajectory_log.hpp"

namespace shapebots {

struct ScriptDrag {
  int id = 0;
  Pose pose;
};
struct ScriptPlace {
  Pose pose;
};
struct ScriptRemove {
  int id = 0;
};
struct ScriptShape {
  ShapeSpec shape;
};

/// Timed interaction in a scenario script.
struct ScriptAction {
  using Drag = ScriptDrag;
  using Place = ScriptPlace;
  using Remove = ScriptRemove;
  using SetShape = ScriptShape;
  double at = 0.0;
  std::variant<Drag, Place, Remove, SetShape> action;
};

struct Scenario {
  std::string name = "scenario";
  SimParams params;
  std::vector<RobotState> robots;
  std::vector<DiscObject> objects;
  std::vector<ShapeSpec> frames;  ///< one frame for a plain shape
  double hold_time = 0.0;
  bool loop = false;
  double time_limit = 120.0;  ///< simulated seconds
  std::vector<ScriptAction> script;
};

/// Reads a scenario document. Relative SVG paths resolve against `base_dir`.
/// Schema violations throw SchemaError naming the JSON path.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
/// Reads and parses a file. A missing file throws std::filesystem::filesystem_error.
Scenario load_scenario(const std::filesystem::path& path);

/// Parses one shape object (see docs/scenario.md). `path` prefixes errors.
ShapeSpec parse_shape(const nlohmann::json& shape, const std::filesystem::path& base_dir = {},
                      const std::string& path = "$.shape");
nlohmann::json shape_to_json(const ShapeSpec& spec);

/// Translates contours so their bounding box is centered on `center`.
std::vector<Polyline> center_contours(const std::vector<Polyline>& contours, Vec2 center);

/// `count` robots on a grid with `spacing` inside [lo, hi], row by row from
/// lo. Throws InvalidArgument if they do not fit.
std::vector<Pose> grid_layout(std::size_t count, Vec2 lo, Vec2 hi, double spacing);
/// Random poses at least `separation` apart and `margin` from the walls.
std::vector<Pose> random_layout(std::size_t count, const SimParams& params, std::uint64_t seed,
                                double separation = 100.0, double margin = 50.0);

std::vector<RobotState> make_robots(const std::vector<Pose>& poses, const std::vector<Mount>& kit);

struct RunResult {
  Metrics metrics;
  TrajectoryLog log;
  WorldState final_world;
  std::vector<Polyline> reference;
};

/// Runs until the final frame is held (and the script has played out) or the
/// time limit passes. The log gets every robot at every control tick and at
/// the end.
RunResult run_scenario(const Scenario& scenario);

/// Builds an engine with the scenario's robots, objects and first shape.
Engine make_engine(const Scenario& scenario);

nlohmann::json event_to_json(const EngineEvent& e);
nlohmann::json metrics_to_json(const Metrics& m, const Scenario& scenario);

}  // namespace shapebots
