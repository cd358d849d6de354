#pragma once

#include <span>
#include <vector>

#include "shapebots/actuator.hpp"
#include "shapebots/geometry.hpp"

namespace shapebots {

/// True when the straight move from `a` to `b` keeps the center out of every
/// obstacle, or at least no deeper inside one than either end already is.
/// Obstacle radii already include the mover's own clearance.
bool path_clear(Vec2 a, Vec2 b, std::span<const Capsule> obstacles) noexcept;

/// Occupancy grid over the world for detours around static obstacles.
class RouteGrid {
 public:
  /// Cells whose centers are within `wall_gap` of a wall start blocked.
  RouteGrid(Vec2 world_size, double cell, double wall_gap);
  void block(const Capsule& obstacle);
  bool blocked(Vec2 p) const noexcept;

  /// Next point to head for on the way from `start` to `goal`: `goal` itself
  /// when the line is clear or no route exists, otherwise the farthest point
  /// of a shortest grid path still in plain sight. Cells within `open_radius`
  /// of the goal count as free, so a goal tucked between neighbors stays
  /// reachable. The search starts from the cells within `open_radius` the
  /// robot can reach straight without closing in on any obstacle.
  Vec2 waypoint(Vec2 start, Vec2 goal, std::span<const Capsule> obstacles, double open_radius) const;

 private:
  Vec2 center(int i, int j) const noexcept { return {(i + 0.5) * cell_, (j + 0.5) * cell_}; }
  int index_of(Vec2 p) const noexcept;

  double cell_;
  int nx_;
  int ny_;
  std::vector<char> blocked_;
};

}  // namespace shapebots
