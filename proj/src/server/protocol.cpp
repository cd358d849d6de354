#include "shapebots/server/protocol.hpp"

#include <filesystem>

#include "shapebots/error.hpp"
#include "shapebots/trajectory_log.hpp"

namespace shapebots::protocol {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (key == "v" || key == "type" || key == "id") continue;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError("$." + key, "unknown key");
    }
  }
}

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("$.") + key, "missing");
  return j.at(key);
}

int robot_id(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected a robot id");
  return j.get<int>();
}

Pose pose(const json& j, const std::string& path) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) throw SchemaError(path, "expected [x, y, heading_deg]");
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number() || !std::isfinite(j[i].get<double>())) {
      throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a finite number");
    }
  }
  return {j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? wrap_angle(deg_to_rad(j[2].get<double>())) : 0.0};
}

json pose_json(const Pose& p) { return json::array({p.x, p.y, rad_to_deg(p.theta)}); }

}  // namespace

Request parse_request(const json& doc) {
  if (!doc.is_object()) throw SchemaError("$", "expected an object");
  if (!doc.contains("v") || !doc["v"].is_number_integer() || doc["v"].get<int>() != kVersion) {
    throw SchemaError("$.v", "expected protocol version 1");
  }
  if (!doc.contains("type") || !doc["type"].is_string()) throw SchemaError("$.type", "expected a message type");
  Request r;
  r.type = doc["type"].get<std::string>();
  if (doc.contains("id")) r.id = doc["id"];
  const std::string& t = r.type;

  if (t == "load_scenario") {
    only_keys(doc, {"name", "scenario"});
    LoadScenario m;
    if (doc.contains("name") == doc.contains("scenario")) throw SchemaError("$", "give exactly one of name, scenario");
    if (doc.contains("name")) {
      if (!doc["name"].is_string()) throw SchemaError("$.name", "expected a string");
      const std::string name = doc["name"].get<std::string>();
      const bool safe = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
      });
      if (!safe) throw SchemaError("$.name", "scenario names use letters, digits, '-' and '_'");
      m.name = name;
    } else {
      if (!doc["scenario"].is_object()) throw SchemaError("$.scenario", "expected an object");
      m.inline_doc = doc["scenario"];
    }
    r.message = m;
  } else if (t == "set_shape") {
    only_keys(doc, {"shape"});
    r.message = SetShape{parse_shape(need(doc, "shape"), {}, "$.shape")};
  } else if (t == "upload_svg") {
    only_keys(doc, {"text", "scale", "mode", "center", "tolerance"});
    json shape = doc;
    shape.erase("v");
    shape.erase("id");
    shape["type"] = "svg";
    if (!shape.contains("text")) throw SchemaError("$.text", "missing");
    r.message = UploadSvg{parse_shape(shape, {}, "$")};
  } else if (t == "set_keyframes") {
    only_keys(doc, {"frames", "hold", "loop"});
    const json& frames = need(doc, "frames");
    if (!frames.is_array() || frames.empty()) throw SchemaError("$.frames", "expected a non-empty array");
    SetKeyframes m;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      m.frames.push_back(parse_shape(frames[i], {}, "$.frames[" + std::to_string(i) + "]"));
    }
    if (doc.contains("hold")) {
      if (!doc["hold"].is_number() || doc["hold"].get<double>() < 0.0) {
        throw SchemaError("$.hold", "expected a non-negative number");
      }
      m.hold = doc["hold"].get<double>();
    }
    if (doc.contains("loop")) {
      if (!doc["loop"].is_boolean()) throw SchemaError("$.loop", "expected true or false");
      m.loop = doc["loop"].get<bool>();
    }
    r.message = std::move(m);
  } else if (t == "drag_robot") {
    only_keys(doc, {"robot", "pose"});
    r.message = DragRobot{robot_id(need(doc, "robot"), "$.robot"), pose(need(doc, "pose"), "$.pose")};
  } else if (t == "place_robot") {
    only_keys(doc, {"pose"});
    r.message = PlaceRobot{pose(need(doc, "pose"), "$.pose")};
  } else if (t == "remove_robot") {
    only_keys(doc, {"robot"});
    r.message = RemoveRobot{robot_id(need(doc, "robot"), "$.robot")};
  } else if (t == "play") {
    only_keys(doc, {});
    r.message = Play{};
  } else if (t == "pause") {
    only_keys(doc, {});
    r.message = Pause{};
  } else if (t == "step") {
    only_keys(doc, {"ticks"});
    StepOnce m;
    if (doc.contains("ticks")) {
      if (!doc["ticks"].is_number_integer() || doc["ticks"].get<long long>() < 1 ||
          doc["ticks"].get<long long>() > 100000) {
        throw SchemaError("$.ticks", "expected an integer in 1..100000");
      }
      m.ticks = doc["ticks"].get<std::uint64_t>();
    }
    r.message = m;
  } else if (t == "set_params") {
    only_keys(doc, {"params"});
    const json& p = need(doc, "params");
    if (!p.is_object()) throw SchemaError("$.params", "expected an object");
    SimParams probe;
    apply_params_json(probe, p, "$.params");  // key and type check only
    r.message = SetParams{p};
  } else if (t == "request_metrics") {
    only_keys(doc, {});
    r.message = RequestMetrics{};
  } else {
    throw SchemaError("$.type", "unknown message type '" + t + "'");
  }
  return r;
}

json snapshot(const Engine& engine, bool playing, std::uint64_t seq) {
  const WorldState& w = engine.world();
  const SimParams& p = engine.params();
  json robots = json::array();
  json phases = json::object();
  for (BehaviorPhase ph : {BehaviorPhase::Idle, BehaviorPhase::Retracting, BehaviorPhase::Navigating,
                           BehaviorPhase::Orienting, BehaviorPhase::Transforming, BehaviorPhase::Holding}) {
    phases[std::string(to_string(ph))] = 0;
  }
  for (const RobotState& r : w.robots) {
    phases[std::string(to_string(r.phase))] = phases[std::string(to_string(r.phase))].get<int>() + 1;
    json units = json::array();
    for (const ActuatorUnit& u : r.units) units.push_back({{"mount", to_string(u.mount)}, {"length", u.length}});
    const Footprint fp = footprint(r, p);
    json capsules = json::array();
    for (const Capsule& c : fp.capsules) capsules.push_back({c.a.x, c.a.y, c.b.x, c.b.y, c.radius});
    json target = nullptr;
    if (r.target) {
      target = {{"pose", pose_json(r.target->goal)},
                {"extension", r.target->extension},
                {"mount", to_string(r.target->mode)}};
    }
    TrajectoryLog one;
    WorldState single;
    single.robots.push_back(r);
    one.record(single);
    robots.push_back({{"id", r.id},
                      {"pose", pose_json(r.pose)},
                      {"phase", to_string(r.phase)},
                      {"mount", one.records().front().mount},
                      {"extension", r.display_extension()},
                      {"height", fp.height},
                      {"body_radius", fp.body_radius},
                      {"capsules", capsules},
                      {"units", units},
                      {"target", target}});
  }
  json objects = json::array();
  for (const DiscObject& o : w.objects) {
    objects.push_back({{"id", o.id}, {"center", {o.center.x, o.center.y}}, {"radius", o.radius}, {"pushable", o.pushable}});
  }
  json reference = json::array();
  const TargetSet* active = engine.active_targets();
  if (active) {
    for (const Polyline& pl : active->reference) {
      json pts = json::array();
      for (Vec2 v : pl.points()) pts.push_back({v.x, v.y});
      reference.push_back({{"points", pts}, {"closed", pl.closed()}});
    }
  }
  return {{"v", kVersion},
          {"type", "snapshot"},
          {"seq", seq},
          {"time", w.time},
          {"tick", engine.tick()},
          {"playing", playing},
          {"world", {p.world_width, p.world_height}},
          {"mode", to_string(w.mode)},
          {"frame", engine.frame_index()},
          {"settled", engine.settled()},
          {"robots", robots},
          {"objects", objects},
          {"phases", phases},
          {"reference", reference}};
}

json event(const EngineEvent& e) { return {{"v", kVersion}, {"type", "event"}, {"event", event_to_json(e)}}; }

json metrics(const Metrics& m, const Engine& engine) {
  Scenario meta;
  meta.name = "live";
  meta.params = engine.params();
  meta.robots = engine.world().robots;
  json body = metrics_to_json(m, meta);
  body.erase("v");
  return {{"v", kVersion}, {"type", "metrics"}, {"metrics", body}};
}

json ack(const Request& r, json extra) {
  json j{{"v", kVersion}, {"type", "ack"}, {"request", r.type}};
  if (r.id) j["id"] = *r.id;
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

json error(const std::string& code, const std::string& message, const std::optional<json>& id) {
  json j{{"v", kVersion}, {"type", "error"}, {"code", code}, {"message", message}};
  if (id) j["id"] = *id;
  return j;
}

json error_from(const std::exception& e, const std::optional<json>& id) {
  if (const auto* s = dynamic_cast<const SchemaError*>(&e)) {
    json j = error("schema", s->what(), id);
    j["path"] = s->path();
    return j;
  }
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    json j = error("parse", p->what(), id);
    j["offset"] = p->offset();
    return j;
  }
  if (const auto* u = dynamic_cast<const UnsupportedFeature*>(&e)) {
    json j = error("unsupported", u->what(), id);
    j["offset"] = u->offset();
    return j;
  }
  if (dynamic_cast<const Infeasible*>(&e)) return error("infeasible", e.what(), id);
  if (dynamic_cast<const InvalidArgument*>(&e)) return error("invalid", e.what(), id);
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return error("not_found", e.what(), id);
  return error("internal", e.what(), id);
}

}  // namespace shapebots::protocol
