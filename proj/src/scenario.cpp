#include "shapebots/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "shapebots/error.hpp"
#include "shapebots/svg.hpp"

namespace shapebots {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string at(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  return j;
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError(at(path, key), "unknown key");
    }
  }
}

const json& required(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw SchemaError(at(path, key), "missing");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "must be finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw SchemaError(path, "must be positive");
  return v;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw SchemaError(path, "expected a non-negative integer");
  return static_cast<std::size_t>(j.get<long long>());
}

Vec2 point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [x, y]");
  return {number(j[0], at(path, 0)), number(j[1], at(path, 1))};
}

// [x, y] or [x, y, heading in degrees]
Pose pose(const json& j, const std::string& path) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) throw SchemaError(path, "expected [x, y, heading_deg]");
  Pose p{number(j[0], at(path, 0)), number(j[1], at(path, 1)), 0.0};
  if (j.size() == 3) p.theta = wrap_angle(deg_to_rad(number(j[2], at(path, 2))));
  return p;
}

json pose_json(const Pose& p) { return json::array({p.x, p.y, rad_to_deg(p.theta)}); }

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

Mount mount(const json& j, const std::string& path) {
  try {
    return mount_from_string(text(j, path));
  } catch (const InvalidArgument& e) {
    throw SchemaError(path, e.what());
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw fs::filesystem_error("cannot open", p, std::make_error_code(std::errc::no_such_file_or_directory));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ShapeSpec parse_svg_shape(const json& j, const fs::path& base_dir, const std::string& path) {
  only_keys(j, path, {"type", "file", "text", "scale", "mode", "tolerance", "center"});
  std::string doc;
  if (j.contains("text")) {
    doc = text(j["text"], at(path, "text"));
  } else {
    const fs::path file = text(required(j, "file", path), at(path, "file"));
    doc = read_file(file.is_absolute() ? file : base_dir / file);
  }
  SvgOptions opt;
  if (j.contains("scale")) opt.mm_per_unit = positive(j["scale"], at(path, "scale"));
  if (j.contains("tolerance")) opt.flatten_tolerance = positive(j["tolerance"], at(path, "tolerance"));
  SvgContour out;
  if (j.contains("mode")) {
    const std::string m = text(j["mode"], at(path, "mode"));
    if (m == "line") out.mode = RenderMode::Line;
    else if (m == "point") out.mode = RenderMode::Point;
    else throw SchemaError(at(path, "mode"), "expected \"line\" or \"point\"");
  }
  out.contours = parse_svg(doc, opt);
  if (out.contours.empty()) throw SchemaError(path, "SVG contains no drawable contour");
  if (j.contains("center")) out.contours = center_contours(out.contours, point(j["center"], at(path, "center")));
  return out;
}

}  // namespace

ShapeSpec parse_shape(const json& j, const fs::path& base_dir, const std::string& path) {
  object(j, path);
  const std::string type = text(required(j, "type", path), at(path, "type"));
  if (type == "lines") {
    only_keys(j, path, {"type", "segments"});
    const json& segs = required(j, "segments", path);
    if (!segs.is_array() || segs.empty()) throw SchemaError(at(path, "segments"), "expected a non-empty array");
    DrawnLines out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string p = at(at(path, "segments"), i);
      if (!segs[i].is_array() || segs[i].size() != 2) throw SchemaError(p, "expected [[x0, y0], [x1, y1]]");
      out.segments.push_back({point(segs[i][0], at(p, 0)), point(segs[i][1], at(p, 1))});
      if (!(out.segments.back().length() > 0.0)) throw SchemaError(p, "zero-length line");
    }
    return out;
  }
  if (type == "svg") return parse_svg_shape(j, base_dir, path);
  if (type == "contours") {
    only_keys(j, path, {"type", "mode", "contours"});
    SvgContour out;
    if (j.contains("mode")) {
      const std::string m = text(j["mode"], at(path, "mode"));
      if (m != "line" && m != "point") throw SchemaError(at(path, "mode"), "expected \"line\" or \"point\"");
      out.mode = m == "line" ? RenderMode::Line : RenderMode::Point;
    }
    const json& list = required(j, "contours", path);
    if (!list.is_array() || list.empty()) throw SchemaError(at(path, "contours"), "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = at(at(path, "contours"), i);
      object(list[i], p);
      only_keys(list[i], p, {"points", "closed"});
      const json& pts = required(list[i], "points", p);
      if (!pts.is_array()) throw SchemaError(at(p, "points"), "expected an array");
      std::vector<Vec2> v;
      for (std::size_t k = 0; k < pts.size(); ++k) v.push_back(point(pts[k], at(at(p, "points"), k)));
      bool closed = false;
      if (list[i].contains("closed")) {
        if (!list[i]["closed"].is_boolean()) throw SchemaError(at(p, "closed"), "expected true or false");
        closed = list[i]["closed"].get<bool>();
      }
      auto pl = Polyline::try_make(std::move(v), closed);
      if (!pl) throw SchemaError(p, "contour needs at least two distinct points");
      out.contours.push_back(std::move(*pl));
    }
    return out;
  }
  if (type == "sine") {
    only_keys(j, path, {"type", "amplitude", "wavelength", "n", "origin"});
    SineWave w;
    if (j.contains("amplitude")) w.amplitude = positive(j["amplitude"], at(path, "amplitude"));
    w.wavelength = positive(required(j, "wavelength", path), at(path, "wavelength"));
    w.n = count(required(j, "n", path), at(path, "n"));
    if (j.contains("origin")) w.origin = point(j["origin"], at(path, "origin"));
    return w;
  }
  if (type == "rectangle") {
    only_keys(j, path, {"type", "width", "height", "center"});
    Rectangle r;
    r.width = positive(required(j, "width", path), at(path, "width"));
    r.height = positive(required(j, "height", path), at(path, "height"));
    r.center = point(required(j, "center", path), at(path, "center"));
    return r;
  }
  if (type == "fence") {
    only_keys(j, path, {"type", "center", "radius", "n", "height"});
    Fence f;
    f.center = point(required(j, "center", path), at(path, "center"));
    f.radius = positive(required(j, "radius", path), at(path, "radius"));
    f.n = count(required(j, "n", path), at(path, "n"));
    if (j.contains("height")) f.height = positive(j["height"], at(path, "height"));
    return f;
  }
  if (type == "data") {
    only_keys(j, path, {"type", "anchors", "values"});
    const json& a = required(j, "anchors", path);
    const json& v = required(j, "values", path);
    if (!a.is_array() || !v.is_array()) throw SchemaError(path, "anchors and values must be arrays");
    if (a.size() != v.size()) throw SchemaError(at(path, "values"), "needs one value per anchor");
    DataMap d;
    for (std::size_t i = 0; i < a.size(); ++i) {
      d.anchors.push_back(point(a[i], at(at(path, "anchors"), i)));
      d.values.push_back(number(v[i], at(at(path, "values"), i)));
    }
    return d;
  }
  if (type == "targets") {
    only_keys(j, path, {"type", "targets"});
    const json& list = required(j, "targets", path);
    if (!list.is_array() || list.empty()) throw SchemaError(at(path, "targets"), "expected a non-empty array");
    ExplicitTargets out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = at(at(path, "targets"), i);
      object(list[i], p);
      only_keys(list[i], p, {"pose", "extension", "mount", "strip_delta"});
      TargetEntry e;
      e.goal = pose(required(list[i], "pose", p), at(p, "pose"));
      if (list[i].contains("extension")) e.extension = number(list[i]["extension"], at(p, "extension"));
      if (list[i].contains("mount")) e.mode = mount(list[i]["mount"], at(p, "mount"));
      if (list[i].contains("strip_delta")) e.strip_delta = number(list[i]["strip_delta"], at(p, "strip_delta"));
      out.entries.push_back(e);
    }
    return out;
  }
  throw SchemaError(at(path, "type"), "unknown shape type '" + type + "'");
}

json shape_to_json(const ShapeSpec& spec) {
  struct V {
    json operator()(const DrawnLines& d) const {
      json segs = json::array();
      for (const Segment& s : d.segments) segs.push_back({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
      return {{"type", "lines"}, {"segments", segs}};
    }
    json operator()(const SvgContour& s) const {
      // Inline as explicit line geometry: the source text is not kept.
      json contours = json::array();
      for (const Polyline& pl : s.contours) {
        json pts = json::array();
        for (Vec2 p : pl.points()) pts.push_back({p.x, p.y});
        contours.push_back({{"points", pts}, {"closed", pl.closed()}});
      }
      return {{"type", "contours"}, {"mode", to_string(s.mode)}, {"contours", contours}};
    }
    json operator()(const SineWave& w) const {
      return {{"type", "sine"}, {"amplitude", w.amplitude}, {"wavelength", w.wavelength}, {"n", w.n},
              {"origin", {w.origin.x, w.origin.y}}};
    }
    json operator()(const Rectangle& r) const {
      return {{"type", "rectangle"}, {"width", r.width}, {"height", r.height}, {"center", {r.center.x, r.center.y}}};
    }
    json operator()(const Fence& f) const {
      return {{"type", "fence"}, {"center", {f.center.x, f.center.y}}, {"radius", f.radius}, {"n", f.n},
              {"height", f.height}};
    }
    json operator()(const DataMap& d) const {
      json a = json::array();
      for (Vec2 p : d.anchors) a.push_back({p.x, p.y});
      return {{"type", "data"}, {"anchors", a}, {"values", d.values}};
    }
    json operator()(const ExplicitTargets& e) const {
      json list = json::array();
      for (const TargetEntry& t : e.entries) {
        list.push_back({{"pose", pose_json(t.goal)}, {"extension", t.extension}, {"mount", to_string(t.mode)},
                        {"strip_delta", t.strip_delta}});
      }
      return {{"type", "targets"}, {"targets", list}};
    }
  };
  return std::visit(V{}, spec);
}

std::vector<Polyline> center_contours(const std::vector<Polyline>& contours, Vec2 center) {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = lo * -1.0;
  for (const Polyline& pl : contours) {
    for (Vec2 p : pl.points()) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  }
  const Vec2 shift = center - (lo + hi) * 0.5;
  std::vector<Polyline> out;
  for (const Polyline& pl : contours) {
    std::vector<Vec2> pts;
    for (Vec2 p : pl.points()) pts.push_back(p + shift);
    out.emplace_back(std::move(pts), pl.closed());
  }
  return out;
}

std::vector<Pose> grid_layout(std::size_t n, Vec2 lo, Vec2 hi, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  const auto cols = static_cast<std::size_t>(std::floor((hi.x - lo.x) / spacing)) + 1;
  const auto rows = static_cast<std::size_t>(std::floor((hi.y - lo.y) / spacing)) + 1;
  if (hi.x < lo.x || hi.y < lo.y || cols * rows < n) {
    throw InvalidArgument("grid region holds fewer than " + std::to_string(n) + " robots");
  }
  std::vector<Pose> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({lo.x + static_cast<double>(i % cols) * spacing, lo.y + static_cast<double>(i / cols) * spacing, 0.0});
  }
  return out;
}

std::vector<Pose> random_layout(std::size_t n, const SimParams& params, std::uint64_t seed, double separation,
                                double margin) {
  RngSequence rng(seed, CounterRng::stream(RngPurpose::ScenarioLayout, 0));
  std::vector<Pose> out;
  for (int attempt = 0; out.size() < n; ++attempt) {
    if (attempt > 100000) throw InvalidArgument("cannot fit " + std::to_string(n) + " robots at random");
    const Pose p{rng.uniform(margin, params.world_width - margin), rng.uniform(margin, params.world_height - margin),
                 rng.uniform(-3.141592653589793, 3.141592653589793)};
    const bool clear = std::all_of(out.begin(), out.end(),
                                   [&](const Pose& q) { return distance(p.position(), q.position()) >= separation; });
    if (clear) out.push_back(p);
  }
  return out;
}

std::vector<RobotState> make_robots(const std::vector<Pose>& poses, const std::vector<Mount>& kit) {
  std::vector<RobotState> out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    RobotState r;
    r.id = static_cast<int>(i);
    r.pose = poses[i];
    for (Mount m : kit) r.units.push_back(ActuatorUnit{.mount = m});
    out.push_back(std::move(r));
  }
  return out;
}

Scenario parse_scenario(const json& doc, const fs::path& base_dir) {
  const std::string root = "$";
  object(doc, root);
  only_keys(doc, root,
            {"name", "seed", "robots", "actuators", "shape", "shapes", "keyframes", "objects", "params", "time_limit",
             "hold", "script"});
  Scenario s;
  if (doc.contains("name")) s.name = text(doc["name"], "$.name");
  if (doc.contains("params")) apply_params_json(s.params, object(doc["params"], "$.params"));
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
      throw SchemaError("$.seed", "expected a non-negative integer");
    }
    s.params.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("time_limit")) s.time_limit = positive(doc["time_limit"], "$.time_limit");
  if (doc.contains("hold")) {
    s.hold_time = number(doc["hold"], "$.hold");
    if (s.hold_time < 0.0) throw SchemaError("$.hold", "must not be negative");
  }

  std::vector<Mount> kit{Mount::Horizontal, Mount::Vertical};
  if (doc.contains("actuators")) {
    const json& a = doc["actuators"];
    if (!a.is_array()) throw SchemaError("$.actuators", "expected an array of mount names");
    kit.clear();
    for (std::size_t i = 0; i < a.size(); ++i) kit.push_back(mount(a[i], at("$.actuators", i)));
  }

  // Named shapes that "shape", keyframes and the script may refer to.
  std::map<std::string, json> named;
  if (doc.contains("shapes")) {
    object(doc["shapes"], "$.shapes");
    for (const auto& [k, v] : doc["shapes"].items()) named[k] = v;
  }
  auto shape_at = [&](const json& j, const std::string& path) -> ShapeSpec {
    if (j.is_string()) {
      const auto it = named.find(j.get<std::string>());
      if (it == named.end()) throw SchemaError(path, "no shape named '" + j.get<std::string>() + "'");
      return parse_shape(it->second, base_dir, "$.shapes." + it->first);
    }
    return parse_shape(j, base_dir, path);
  };

  const json& robots = required(doc, "robots", root);
  std::vector<Pose> poses;
  if (robots.is_array()) {
    for (std::size_t i = 0; i < robots.size(); ++i) poses.push_back(pose(robots[i], at("$.robots", i)));
  } else {
    object(robots, "$.robots");
    only_keys(robots, "$.robots", {"count", "layout", "region", "spacing", "seed"});
    const std::size_t n = count(required(robots, "count", "$.robots"), "$.robots.count");
    const std::string layout = robots.contains("layout") ? text(robots["layout"], "$.robots.layout") : "grid";
    if (layout == "grid") {
      const double spacing = robots.contains("spacing") ? positive(robots["spacing"], "$.robots.spacing") : 80.0;
      Vec2 lo{60.0, 60.0};
      Vec2 hi{s.params.world_width - 60.0, s.params.world_height - 60.0};
      if (robots.contains("region")) {
        const json& r = robots["region"];
        if (!r.is_array() || r.size() != 2) throw SchemaError("$.robots.region", "expected [[x0, y0], [x1, y1]]");
        lo = point(r[0], "$.robots.region[0]");
        hi = point(r[1], "$.robots.region[1]");
      }
      try {
        poses = grid_layout(n, lo, hi, spacing);
      } catch (const InvalidArgument& e) {
        throw SchemaError("$.robots", e.what());
      }
    } else if (layout == "random") {
      if (robots.contains("seed") &&
          (!robots["seed"].is_number_integer() || robots["seed"].get<long long>() < 0)) {
        throw SchemaError("$.robots.seed", "expected a non-negative integer");
      }
      const std::uint64_t seed = robots.contains("seed") ? robots["seed"].get<std::uint64_t>() : s.params.seed;
      try {
        poses = random_layout(n, s.params, seed);
      } catch (const InvalidArgument& e) {
        throw SchemaError("$.robots", e.what());
      }
    } else {
      throw SchemaError("$.robots.layout", "expected \"grid\" or \"random\"");
    }
  }
  if (poses.empty()) throw SchemaError("$.robots", "scenario needs at least one robot");
  const double m = s.params.body_radius;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Pose& p = poses[i];
    if (p.x < m || p.y < m || p.x > s.params.world_width - m || p.y > s.params.world_height - m) {
      throw SchemaError(at("$.robots", i), "pose outside the world");
    }
  }
  s.robots = make_robots(poses, kit);

  if (doc.contains("shape") && doc.contains("keyframes")) throw SchemaError(root, "give either shape or keyframes");
  if (doc.contains("shape")) {
    s.frames.push_back(shape_at(doc["shape"], "$.shape"));
  } else if (doc.contains("keyframes")) {
    const json& k = object(doc["keyframes"], "$.keyframes");
    only_keys(k, "$.keyframes", {"frames", "hold", "loop"});
    const json& frames = required(k, "frames", "$.keyframes");
    if (!frames.is_array() || frames.empty()) throw SchemaError("$.keyframes.frames", "expected a non-empty array");
    for (std::size_t i = 0; i < frames.size(); ++i) s.frames.push_back(shape_at(frames[i], at("$.keyframes.frames", i)));
    if (k.contains("hold")) s.hold_time = number(k["hold"], "$.keyframes.hold");
    if (s.hold_time < 0.0) throw SchemaError("$.keyframes.hold", "must not be negative");
    if (k.contains("loop")) {
      if (!k["loop"].is_boolean()) throw SchemaError("$.keyframes.loop", "expected true or false");
      s.loop = k["loop"].get<bool>();
    }
  }

  if (doc.contains("objects")) {
    const json& objs = doc["objects"];
    if (!objs.is_array()) throw SchemaError("$.objects", "expected an array");
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const std::string p = at("$.objects", i);
      object(objs[i], p);
      only_keys(objs[i], p, {"center", "radius", "pushable"});
      DiscObject o;
      o.id = static_cast<int>(i);
      o.center = point(required(objs[i], "center", p), at(p, "center"));
      o.radius = positive(required(objs[i], "radius", p), at(p, "radius"));
      if (objs[i].contains("pushable")) {
        if (!objs[i]["pushable"].is_boolean()) throw SchemaError(at(p, "pushable"), "expected true or false");
        o.pushable = objs[i]["pushable"].get<bool>();
      }
      s.objects.push_back(o);
    }
  }

  if (doc.contains("script")) {
    const json& script = doc["script"];
    if (!script.is_array()) throw SchemaError("$.script", "expected an array");
    for (std::size_t i = 0; i < script.size(); ++i) {
      const std::string p = at("$.script", i);
      const json& a = object(script[i], p);
      only_keys(a, p, {"at", "drag", "place", "remove", "shape"});
      ScriptAction act;
      act.at = number(required(a, "at", p), at(p, "at"));
      if (act.at < 0.0) throw SchemaError(at(p, "at"), "must not be negative");
      if (a.size() != 2) throw SchemaError(p, "exactly one of drag, place, remove, shape");
      if (a.contains("drag")) {
        const json& d = object(a["drag"], at(p, "drag"));
        only_keys(d, at(p, "drag"), {"id", "pose"});
        const json& id = required(d, "id", at(p, "drag"));
        if (!id.is_number_integer()) throw SchemaError(at(at(p, "drag"), "id"), "expected an integer");
        act.action = ScriptAction::Drag{id.get<int>(), pose(required(d, "pose", at(p, "drag")), at(at(p, "drag"), "pose"))};
      } else if (a.contains("place")) {
        act.action = ScriptAction::Place{pose(a["place"], at(p, "place"))};
      } else if (a.contains("remove")) {
        if (!a["remove"].is_number_integer()) throw SchemaError(at(p, "remove"), "expected a robot id");
        act.action = ScriptAction::Remove{a["remove"].get<int>()};
      } else {
        act.action = ScriptAction::SetShape{shape_at(a["shape"], at(p, "shape"))};
      }
      s.script.push_back(std::move(act));
    }
    std::stable_sort(s.script.begin(), s.script.end(),
                     [](const ScriptAction& x, const ScriptAction& y) { return x.at < y.at; });
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  const std::string body = read_file(path);
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what(), e.byte);
  }
  return parse_scenario(doc, path.parent_path());
}

Engine make_engine(const Scenario& scenario) {
  Engine engine(scenario.params, scenario.robots, scenario.objects);
  if (!scenario.frames.empty()) {
    AnimationPlan plan = sequence_keyframes(scenario.frames, scenario.robots.size(), scenario.hold_time);
    plan.loop = scenario.loop;
    engine.set_animation(std::move(plan));
  }
  return engine;
}

RunResult run_scenario(const Scenario& scenario) {
  Engine engine = make_engine(scenario);
  RunResult result;
  engine.on_control_tick = [&](const WorldState& w) { result.log.record(w); };
  std::size_t next = 0;
  // The controller only learns of a drag or removal through the tracker, so
  // give it time to notice before calling the run settled.
  const SimParams& p = scenario.params;
  const double notice = p.absence_timeout + (p.max_dropout_ticks + 3) * p.dt_control;
  double quiet_from = 0.0;
  for (;;) {
    while (next < scenario.script.size() && scenario.script[next].at <= engine.time() + 1e-9) {
      std::visit(
          [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ScriptAction::Drag>) engine.drag_robot(a.id, a.pose);
            else if constexpr (std::is_same_v<T, ScriptAction::Place>) engine.place_robot(a.pose);
            else if constexpr (std::is_same_v<T, ScriptAction::Remove>) engine.remove_robot(a.id);
            else engine.set_shape(a.shape);
          },
          scenario.script[next].action);
      quiet_from = engine.time() + notice;
      ++next;
    }
    const bool script_done = next == scenario.script.size();
    if (script_done && engine.time() >= quiet_from && engine.settled()) break;
    if (engine.time() >= scenario.time_limit - 1e-9) break;
    engine.step();
  }
  result.log.record(engine.world());
  result.metrics = engine.metrics();
  result.final_world = engine.world();
  if (const TargetSet* t = engine.active_targets()) result.reference = t->reference;
  return result;
}

json event_to_json(const EngineEvent& e) {
  json j{{"time", e.time}, {"kind", to_string(e.kind)}, {"message", e.message}};
  if (e.robot_id >= 0) j["robot"] = e.robot_id;
  if (e.input) {
    j["input"] = {{"kind", to_string(e.input->kind)},
                  {"robot", e.input->robot_id},
                  {"before", pose_json(e.input->before)},
                  {"after", pose_json(e.input->after)},
                  {"time", e.input->time}};
  }
  return j;
}

json metrics_to_json(const Metrics& m, const Scenario& scenario) {
  json events = json::array();
  for (const EngineEvent& e : m.events) events.push_back(event_to_json(e));
  json j{{"v", 1},
         {"scenario", scenario.name},
         {"seed", scenario.params.seed},
         {"robots", scenario.robots.size()},
         {"completed", m.completed},
         {"makespan", m.makespan},
         {"sim_time", m.sim_time},
         {"min_separation", nullptr},
         {"coverage_error", nullptr},
         {"total_travel", m.total_travel},
         {"events", events}};
  if (m.min_separation) j["min_separation"] = *m.min_separation;
  if (m.coverage_error) j["coverage_error"] = *m.coverage_error;
  return j;
}

}  // namespace shapebots
