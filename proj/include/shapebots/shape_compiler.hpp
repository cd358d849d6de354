#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shapebots/actuator.hpp"
#include "shapebots/geometry.hpp"
#include "shapebots/robot.hpp"
#include "shapebots/world.hpp"

namespace shapebots {

struct SimParams;

struct DrawnLines {
  std::vector<Segment> segments;
};

struct SvgContour {
  std::vector<Polyline> contours;
  RenderMode mode = RenderMode::Line;
};

/// n robots spaced over one wavelength starting at `origin`; heights follow
/// the wave with the trough at base length and the crest `amplitude` above it.
struct SineWave {
  double amplitude = 175.0;  ///< crest minus trough, mm
  double wavelength = 600.0;
  std::size_t n = 7;
  Vec2 origin;
};

struct Rectangle {
  double width = 100.0;
  double height = 50.0;
  Vec2 center;
};

struct Fence {
  Vec2 center;
  double radius = 100.0;
  std::size_t n = 6;
  double height = 200.0;
};

struct DataMap {
  std::vector<Vec2> anchors;
  std::vector<double> values;
};

/// Targets given verbatim.
struct ExplicitTargets {
  std::vector<TargetEntry> entries;
};

using ShapeSpec = std::variant<DrawnLines, SvgContour, SineWave, Rectangle, Fence, DataMap, ExplicitTargets>;

struct TargetSet {
  std::vector<TargetEntry> entries;
  RenderMode mode = RenderMode::Line;
  /// Contours the formation is meant to draw; empty for height-only shapes.
  std::vector<Polyline> reference;
  std::vector<std::string> warnings;
};

struct AnimationPlan {
  std::vector<TargetSet> frames;
  std::vector<ShapeSpec> sources;  ///< spec each frame was compiled from
  double hold_time = 0.0;          ///< s all robots must hold before advancing
  bool loop = false;
};

TargetSet compile_line_mode(std::span<const Polyline> contours, std::size_t n);
TargetSet compile_point_mode(std::span<const Polyline> contours, std::size_t n);
TargetSet compile_sine(const SineWave& wave);
TargetSet compile_rectangle(const Rectangle& rect);
TargetSet compile_fence(const Fence& fence);
TargetSet data_to_heights(std::span<const Vec2> anchors, std::span<const double> values);

/// Compiles any spec. `n_robots` is used by SVG contours; drawn lines get one
/// robot per line and parametric shapes carry their own counts.
TargetSet compile_shape(const ShapeSpec& spec, std::size_t n_robots);

/// Compiles every frame with the same robot count. Errors name the frame.
AnimationPlan sequence_keyframes(std::span<const ShapeSpec> frames, std::size_t n_robots, double hold_time);

/// Moves targets apart until every pair of goals is at least `min_gap`
/// apart, keeping them `margin` inside the world. Adds a warning per pair
/// that was too close and returns how many there were.
std::size_t separate_targets(TargetSet& set, double min_gap, Vec2 world_size, double margin);

/// What the robots currently draw: extended horizontal bars as segments,
/// everything else as body centers.
struct RenderedGeometry {
  std::vector<Segment> segments;
  std::vector<Vec2> points;

  bool empty() const noexcept { return segments.empty() && points.empty(); }
};

RenderedGeometry geometry_of(std::span<const Polyline> reference);
/// Geometry drawn by robots in Holding.
RenderedGeometry rendered_geometry(const WorldState& world);

/// Mean of the two directed mean nearest distances between geometries, each
/// sampled every `step` mm.
double symmetric_mean_distance(const RenderedGeometry& a, const RenderedGeometry& b, double step = 1.0);

/// Coverage error of the Holding robots against `reference`, mm. Throws
/// NotReady when no robot is Holding.
double coverage_error(const WorldState& world, std::span<const Polyline> reference);

}  // namespace shapebots
