#pragma once

#include <string_view>
#include <vector>

#include "shapebots/geometry.hpp"

namespace shapebots {

struct SvgOptions {
  double mm_per_unit = 1.0;        ///< scale applied to every user-space coordinate
  double flatten_tolerance = 1.0;  ///< max chord deviation of flattened curves, mm
};

/// Parses the supported SVG subset (path with M/L/H/V/C/Q/Z in both cases,
/// polyline, polygon, rect, line) into polylines in millimeters.
///
/// Throws ParseError (with byte offset) for malformed XML or path data, and
/// UnsupportedFeature for arcs, smooth curves and unit suffixes other than px.
/// Transforms and styles are ignored.
std::vector<Polyline> parse_svg(std::string_view document, const SvgOptions& options = {});

/// Flattens a cubic Bézier by recursive subdivision. The returned points start
/// at p0 and end at p3 and every point lies on the curve.
std::vector<Vec2> flatten_cubic(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double tolerance);
std::vector<Vec2> flatten_quadratic(Vec2 p0, Vec2 p1, Vec2 p2, double tolerance);

}  // namespace shapebots
