#pragma once

#include <optional>
#include <span>

#include "shapebots/geometry.hpp"

namespace shapebots {

struct RvoAgent {
  Vec2 position;
  Vec2 velocity;  ///< current velocity, mm/s
  double radius = 25.0;
  double max_speed = 170.0;
};

struct RvoNeighbor {
  Vec2 position;
  Vec2 velocity;
  double radius = 25.0;
  /// Reciprocal neighbors take half of the avoidance effort. Non-reciprocal
  /// ones (parked, transforming, holding, fixed obstacles) take none.
  bool reciprocal = true;
};

/// Axis-aligned region the agent's center must stay in.
struct RvoBounds {
  Vec2 min;
  Vec2 max;
};

struct RvoOptions {
  double time_horizon = 2.0;
  /// Step used to separate agents that already overlap.
  double time_step = 0.151;
  std::optional<RvoBounds> bounds;
  /// Time within which the agent may close the gap to a wall.
  double wall_time = 0.151;
};

/// A half-plane of permitted velocities: everything to the left of the
/// directed line through `point` along `direction`.
struct HalfPlane {
  Vec2 point;
  Vec2 direction;
};

/// Reciprocal velocity obstacle constraints for `agent`, in the linear
/// (half-plane) form, followed by the wall constraints.
struct RvoConstraints {
  std::vector<HalfPlane> walls;      ///< never relaxed
  std::vector<HalfPlane> neighbors;  ///< relaxed uniformly when infeasible
};

RvoConstraints build_constraints(const RvoAgent& agent, std::span<const RvoNeighbor> neighbors,
                                 const RvoOptions& options);

/// Velocity closest to `preferred` that lies outside every neighbor's
/// velocity obstacle for the time horizon, with magnitude <= max_speed. When
/// no such velocity exists, returns the one minimizing the largest
/// penetration. With no neighbors and no walls, returns `preferred` capped at
/// max_speed.
Vec2 resolve_velocity(const RvoAgent& agent, std::span<const RvoNeighbor> neighbors, Vec2 preferred,
                      const RvoOptions& options);

}  // namespace shapebots
