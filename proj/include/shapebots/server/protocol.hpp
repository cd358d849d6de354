#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "shapebots/engine.hpp"
#include "shapebots/scenario.hpp"

namespace shapebots::protocol {

inline constexpr int kVersion = 1;

struct LoadScenario {
  std::optional<std::string> name;      ///< file in the scenario directory
  std::optional<nlohmann::json> inline_doc;
};
struct SetShape {
  ShapeSpec shape;
};
struct UploadSvg {
  ShapeSpec shape;  ///< already parsed
};
struct SetKeyframes {
  std::vector<ShapeSpec> frames;
  double hold = 0.0;
  bool loop = false;
};
struct DragRobot {
  int id = 0;
  Pose pose;
};
struct PlaceRobot {
  Pose pose;
};
struct RemoveRobot {
  int id = 0;
};
struct Play {};
struct Pause {};
struct StepOnce {
  std::uint64_t ticks = 1;
};
struct SetParams {
  nlohmann::json patch;
};
struct RequestMetrics {};

using ClientMessage = std::variant<LoadScenario, SetShape, UploadSvg, SetKeyframes, DragRobot, PlaceRobot,
                                   RemoveRobot, Play, Pause, StepOnce, SetParams, RequestMetrics>;

struct Request {
  std::string type;
  std::optional<nlohmann::json> id;  ///< echoed in the reply
  ClientMessage message;
};

/// Validates and decodes a client message. Throws SchemaError (with a JSON
/// path) on any violation; UploadSvg additionally throws ParseError or
/// UnsupportedFeature from the SVG reader.
Request parse_request(const nlohmann::json& doc);

nlohmann::json snapshot(const Engine& engine, bool playing, std::uint64_t seq);
nlohmann::json event(const EngineEvent& e);
nlohmann::json metrics(const Metrics& m, const Engine& engine);
nlohmann::json ack(const Request& r, nlohmann::json extra = nlohmann::json::object());
/// `code` is one of: bad_json, schema, parse, unsupported, infeasible,
/// invalid, not_found, internal.
nlohmann::json error(const std::string& code, const std::string& message,
                     const std::optional<nlohmann::json>& id = std::nullopt);

/// Maps an exception to an error message.
nlohmann::json error_from(const std::exception& e, const std::optional<nlohmann::json>& id = std::nullopt);

}  // namespace shapebots::protocol
