#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shapebots/geometry.hpp"

namespace shapebots {

/// Splits `k` across contours in proportion to `weights` using largest-remainder
/// rounding. When k >= weights.size() every contour receives at least one.
/// Throws Infeasible when k < weights.size().
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t k);

/// Cuts the contours into exactly `k` chords whose endpoints sit at equal arc
/// length along each contour, starting at its first vertex.
///
/// A closed contour given a single chord gets the chord from its start to its
/// half-perimeter point; an open contour given one chord spans start to end.
std::vector<Segment> partition_to_segments(std::span<const Polyline> contours, std::size_t k);

struct Station {
  Vec2 point;
  double tangent = 0.0;  ///< radians
};

/// Exactly `n` points at equal arc-length stations: closed contours get the
/// vertices of their chord partition, open contours include both ends.
std::vector<Station> arc_length_stations(std::span<const Polyline> contours, std::size_t n);

}  // namespace shapebots
