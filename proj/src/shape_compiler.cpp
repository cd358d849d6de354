#include "shapebots/shape_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "shapebots/error.hpp"
#include "shapebots/partition.hpp"

namespace shapebots {

namespace {

constexpr double kMinExtension = 25.0;
constexpr double kMaxExtension = 200.0;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

std::string mm(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::vector<Vec2> sample_segment(const Segment& s, double step) {
  const double len = s.length();
  const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / step)));
  std::vector<Vec2> out;
  out.reserve(pieces + 1);
  for (std::size_t i = 0; i <= pieces; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(pieces);
    out.push_back(s.a + (s.b - s.a) * f);
  }
  return out;
}

std::vector<Vec2> samples_of(const RenderedGeometry& g, double step) {
  std::vector<Vec2> out = g.points;
  for (const Segment& s : g.segments) {
    std::vector<Vec2> part = sample_segment(s, step);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

double nearest(Vec2 p, const RenderedGeometry& g) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : g.segments) best = std::min(best, distance_to_segment(p, s.a, s.b));
  for (Vec2 q : g.points) best = std::min(best, distance(p, q));
  return best;
}

double directed_mean(const std::vector<Vec2>& samples, const RenderedGeometry& to) {
  double sum = 0.0;
  for (Vec2 p : samples) sum += nearest(p, to);
  return sum / static_cast<double>(samples.size());
}

}  // namespace

std::string_view to_string(RenderMode m) noexcept { return m == RenderMode::Line ? "line" : "point"; }

RobotState* WorldState::find_robot(int id) noexcept {
  for (RobotState& r : robots) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const RobotState* WorldState::find_robot(int id) const noexcept {
  return const_cast<WorldState*>(this)->find_robot(id);
}

TargetSet compile_line_mode(std::span<const Polyline> contours, std::size_t n) {
  if (n == 0) throw InvalidArgument("line mode needs at least one robot");
  if (contours.empty()) throw InvalidArgument("shape has no contours");
  TargetSet set;
  set.mode = RenderMode::Line;
  set.reference.assign(contours.begin(), contours.end());
  for (const Segment& s : partition_to_segments(contours, n)) {
    TargetEntry e;
    e.goal = {s.midpoint().x, s.midpoint().y, s.orientation()};
    e.mode = Mount::Horizontal;
    const double len = s.length();
    e.extension = std::clamp(len, kMinExtension, kMaxExtension);
    if (len > kMaxExtension) {
      set.warnings.push_back("segment of " + mm(len) + " mm clamped to " + mm(kMaxExtension) + " mm");
    }
    set.entries.push_back(e);
  }
  return set;
}

TargetSet compile_point_mode(std::span<const Polyline> contours, std::size_t n) {
  if (n == 0) throw InvalidArgument("point mode needs at least one robot");
  if (contours.empty()) throw InvalidArgument("shape has no contours");
  TargetSet set;
  set.mode = RenderMode::Point;
  set.reference.assign(contours.begin(), contours.end());
  for (const Station& st : arc_length_stations(contours, n)) {
    TargetEntry e;
    e.goal = {st.point.x, st.point.y, st.tangent};
    e.extension = kMinExtension;
    e.mode = Mount::Horizontal;
    set.entries.push_back(e);
  }
  return set;
}

TargetSet compile_sine(const SineWave& wave) {
  require_finite(wave.amplitude, "amplitude");
  require_finite(wave.wavelength, "wavelength");
  if (!(wave.amplitude > 0.0)) throw InvalidArgument("sine amplitude must be positive");
  if (wave.amplitude > kMaxExtension - kMinExtension) {
    throw InvalidArgument("sine amplitude " + mm(wave.amplitude) + " mm exceeds the extension range of " +
                          mm(kMaxExtension - kMinExtension) + " mm");
  }
  if (!(wave.wavelength > 0.0)) throw InvalidArgument("sine wavelength must be positive");
  if (wave.n < 2) throw InvalidArgument("sine wave needs at least two robots");
  TargetSet set;
  const double spacing = wave.wavelength / static_cast<double>(wave.n - 1);
  for (std::size_t k = 0; k < wave.n; ++k) {
    const double x = static_cast<double>(k) * spacing;
    TargetEntry e;
    e.goal = {wave.origin.x + x, wave.origin.y, 0.0};
    e.mode = Mount::Vertical;
    const double s = std::sin(2.0 * std::numbers::pi * x / wave.wavelength);
    e.extension = std::clamp(kMinExtension + wave.amplitude * (1.0 + s) / 2.0, kMinExtension, kMaxExtension);
    set.entries.push_back(e);
  }
  return set;
}

TargetSet compile_rectangle(const Rectangle& rect) {
  require_finite(rect.width, "width");
  require_finite(rect.height, "height");
  if (!(rect.width > 0.0) || !(rect.height > 0.0)) throw InvalidArgument("rectangle sides must be positive");
  const double hw = rect.width / 2.0;
  const double hh = rect.height / 2.0;
  const Vec2 c = rect.center;
  const std::vector<Vec2> corners{{c.x - hw, c.y - hh}, {c.x + hw, c.y - hh}, {c.x + hw, c.y + hh}, {c.x - hw, c.y + hh}};
  TargetSet set;
  set.reference.emplace_back(corners, true);
  for (std::size_t i = 0; i < 4; ++i) {
    const Segment s{corners[i], corners[(i + 1) % 4]};
    TargetEntry e;
    e.goal = {s.midpoint().x, s.midpoint().y, s.orientation()};
    e.extension = std::clamp(s.length(), kMinExtension, kMaxExtension);
    if (s.length() > kMaxExtension) {
      set.warnings.push_back("rectangle side of " + mm(s.length()) + " mm clamped to " + mm(kMaxExtension) + " mm");
    }
    set.entries.push_back(e);
  }
  return set;
}

TargetSet compile_fence(const Fence& fence) {
  require_finite(fence.radius, "radius");
  require_finite(fence.height, "height");
  if (!(fence.radius > 0.0)) throw InvalidArgument("fence radius must be positive");
  if (fence.n == 0) throw InvalidArgument("fence needs at least one robot");
  if (!(fence.height > 0.0)) throw InvalidArgument("fence height must be positive");
  TargetSet set;
  const double h = std::clamp(fence.height, kMinExtension, kMaxExtension);
  if (h != fence.height) set.warnings.push_back("fence height " + mm(fence.height) + " mm clamped to " + mm(h) + " mm");
  for (std::size_t k = 0; k < fence.n; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(fence.n);
    const Vec2 p = fence.center + unit_from_angle(phi) * fence.radius;
    TargetEntry e;
    e.goal = {p.x, p.y, wrap_angle(phi + std::numbers::pi / 2.0)};
    e.mode = Mount::Vertical;
    e.extension = h;
    set.entries.push_back(e);
  }
  return set;
}

TargetSet data_to_heights(std::span<const Vec2> anchors, std::span<const double> values) {
  if (anchors.size() != values.size()) throw InvalidArgument("data map needs one value per anchor");
  if (anchors.empty()) throw InvalidArgument("data map is empty");
  for (double v : values) require_finite(v, "data value");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  TargetSet set;
  if (!(span > 0.0)) set.warnings.push_back("all data values equal; heights left flat");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    require_finite(anchors[i].x, "anchor");
    require_finite(anchors[i].y, "anchor");
    TargetEntry e;
    e.goal = {anchors[i].x, anchors[i].y, 0.0};
    e.mode = Mount::Vertical;
    e.extension = span > 0.0 ? kMinExtension + (kMaxExtension - kMinExtension) * (values[i] - *lo) / span
                             : kMinExtension;
    set.entries.push_back(e);
  }
  return set;
}

TargetSet compile_shape(const ShapeSpec& spec, std::size_t n_robots) {
  struct Visitor {
    std::size_t n;
    TargetSet operator()(const DrawnLines& d) const {
      if (d.segments.empty()) throw InvalidArgument("no lines drawn");
      std::vector<Polyline> lines;
      for (const Segment& s : d.segments) {
        if (!(s.length() > Polyline::kMinSpacing)) throw InvalidArgument("drawn line has zero length");
        lines.emplace_back(std::vector<Vec2>{s.a, s.b}, false);
      }
      return compile_line_mode(lines, lines.size());
    }
    TargetSet operator()(const SvgContour& s) const {
      return s.mode == RenderMode::Line ? compile_line_mode(s.contours, n) : compile_point_mode(s.contours, n);
    }
    TargetSet operator()(const SineWave& w) const { return compile_sine(w); }
    TargetSet operator()(const Rectangle& r) const { return compile_rectangle(r); }
    TargetSet operator()(const Fence& f) const { return compile_fence(f); }
    TargetSet operator()(const DataMap& d) const { return data_to_heights(d.anchors, d.values); }
    TargetSet operator()(const ExplicitTargets& e) const {
      if (e.entries.empty()) throw InvalidArgument("explicit target list is empty");
      TargetSet set;
      for (TargetEntry t : e.entries) {
        if (t.extension < kMinExtension || t.extension > kMaxExtension) {
          set.warnings.push_back("extension " + mm(t.extension) + " mm clamped into range");
          t.extension = std::clamp(t.extension, kMinExtension, kMaxExtension);
        }
        set.entries.push_back(t);
      }
      return set;
    }
  };
  return std::visit(Visitor{n_robots}, spec);
}

AnimationPlan sequence_keyframes(std::span<const ShapeSpec> frames, std::size_t n_robots, double hold_time) {
  if (frames.empty()) throw InvalidArgument("animation needs at least one frame");
  if (!(hold_time >= 0.0) || !std::isfinite(hold_time)) throw InvalidArgument("hold time must be non-negative");
  AnimationPlan plan;
  plan.hold_time = hold_time;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    TargetSet set;
    try {
      set = compile_shape(frames[i], n_robots);
    } catch (const Infeasible& e) {
      throw Infeasible("frame " + std::to_string(i) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("frame " + std::to_string(i) + ": " + e.what());
    }
    if (set.entries.size() > n_robots) {
      throw Infeasible("frame " + std::to_string(i) + ": " + std::to_string(set.entries.size()) +
                       " targets for " + std::to_string(n_robots) + " robots");
    }
    plan.frames.push_back(std::move(set));
    plan.sources.push_back(frames[i]);
  }
  return plan;
}

std::size_t separate_targets(TargetSet& set, double min_gap, Vec2 world_size, double margin) {
  auto& e = set.entries;
  std::size_t conflicts = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const double d = distance(e[i].goal.position(), e[j].goal.position());
      if (d < min_gap) {
        ++conflicts;
        set.warnings.push_back("targets " + std::to_string(i) + " and " + std::to_string(j) + " are " + mm(d) +
                               " mm apart; spread to " + mm(min_gap) + " mm");
      }
    }
  }
  if (conflicts == 0) return 0;
  auto clamp_in = [&](Pose& p) {
    p.x = std::clamp(p.x, margin, world_size.x - margin);
    p.y = std::clamp(p.y, margin, world_size.y - margin);
  };
  // Jacobi-style sweeps so the result does not depend on pair order within a sweep.
  for (int sweep = 0; sweep < 200; ++sweep) {
    std::vector<Vec2> shift(e.size());
    bool moved = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (std::size_t j = i + 1; j < e.size(); ++j) {
        Vec2 d = e[j].goal.position() - e[i].goal.position();
        const double len = norm(d);
        // A little past the gap so the sweep terminates.
        const double need = min_gap * (1.0 + 1e-6);
        if (len >= need) continue;
        const Vec2 u = len > 1e-9 ? d / len : unit_from_angle(e[i].goal.theta + std::numbers::pi / 2.0);
        const double push = (need - len) / 2.0;
        shift[i] -= u * push;
        shift[j] += u * push;
        moved = true;
      }
    }
    if (!moved) break;
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i].goal.x += shift[i].x;
      e[i].goal.y += shift[i].y;
      clamp_in(e[i].goal);
    }
  }
  return conflicts;
}

RenderedGeometry geometry_of(std::span<const Polyline> reference) {
  RenderedGeometry g;
  for (const Polyline& pl : reference) {
    for (std::size_t i = 0; i < pl.edge_count(); ++i) g.segments.push_back(pl.edge(i));
  }
  return g;
}

RenderedGeometry rendered_geometry(const WorldState& world) {
  RenderedGeometry g;
  for (const RobotState& r : world.robots) {
    if (r.phase != BehaviorPhase::Holding || !r.present) continue;
    const int active = r.active_unit();
    const bool bar = world.mode == RenderMode::Line && active >= 0 &&
                     r.units[static_cast<std::size_t>(active)].mount == Mount::Horizontal &&
                     r.units[static_cast<std::size_t>(active)].length > kMinExtension;
    if (!bar) {
      g.points.push_back(r.pose.position());
      continue;
    }
    const Vec2 half = unit_from_angle(r.pose.theta) * (r.units[static_cast<std::size_t>(active)].length / 2.0);
    g.segments.push_back({r.pose.position() - half, r.pose.position() + half});
  }
  return g;
}

double symmetric_mean_distance(const RenderedGeometry& a, const RenderedGeometry& b, double step) {
  if (a.empty() || b.empty()) throw InvalidArgument("distance to empty geometry");
  if (!(step > 0.0)) throw InvalidArgument("sampling step must be positive");
  return 0.5 * (directed_mean(samples_of(a, step), b) + directed_mean(samples_of(b, step), a));
}

double coverage_error(const WorldState& world, std::span<const Polyline> reference) {
  const RenderedGeometry drawn = rendered_geometry(world);
  if (drawn.empty()) throw NotReady("no robot is holding a target");
  if (reference.empty()) throw InvalidArgument("no reference contour");
  return symmetric_mean_distance(geometry_of(reference), drawn);
}

}  // namespace shapebots
