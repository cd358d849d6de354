#include "shapebots/rvo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace shapebots {

namespace {

constexpr double kEpsilon = 1e-9;

bool violates(const HalfPlane& line, Vec2 v, double slack = 0.0) {
  return cross(line.direction, line.point - v) > slack;
}

/// Optimum on line `index` subject to lines [0, index) and the speed circle.
bool solve_on_line(const std::vector<HalfPlane>& lines, std::size_t index, double radius, Vec2 target,
                   bool optimize_direction, Vec2& result) {
  const HalfPlane& line = lines[index];
  const double along = dot(line.point, line.direction);
  const double discriminant = along * along + radius * radius - norm_sq(line.point);
  if (discriminant < 0.0) return false;  // the speed circle misses this line

  const double root = std::sqrt(discriminant);
  double t_left = -along - root;
  double t_right = -along + root;

  for (std::size_t i = 0; i < index; ++i) {
    const double denominator = cross(line.direction, lines[i].direction);
    const double numerator = cross(lines[i].direction, line.point - lines[i].point);
    if (std::fabs(denominator) <= kEpsilon) {
      if (numerator < 0.0) return false;  // parallel and fully excluded
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (optimize_direction) {
    result = line.point + line.direction * (dot(target, line.direction) > 0.0 ? t_right : t_left);
  } else {
    const double t = std::clamp(dot(line.direction, target - line.point), t_left, t_right);
    result = line.point + line.direction * t;
  }
  return true;
}

/// Incremental 2D LP. Returns lines.size() on success, else the failing index.
std::size_t solve_lp(const std::vector<HalfPlane>& lines, double radius, Vec2 target, bool optimize_direction,
                     Vec2& result) {
  if (optimize_direction) {
    result = target * radius;
  } else if (norm_sq(target) > radius * radius) {
    result = normalized(target) * radius;
  } else {
    result = target;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!violates(lines[i], result)) continue;
    const Vec2 previous = result;
    if (!solve_on_line(lines, i, radius, target, optimize_direction, result)) {
      result = previous;
      return i;
    }
  }
  return lines.size();
}

/// Fallback when the constraints are infeasible: minimize the largest
/// violation of the relaxable lines while keeping the first `hard` lines.
void solve_least_penetration(const std::vector<HalfPlane>& lines, std::size_t hard, std::size_t begin,
                             double radius, Vec2& result) {
  double worst = 0.0;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    if (!violates(lines[i], result, worst)) continue;
    std::vector<HalfPlane> projected(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(hard));
    for (std::size_t j = hard; j < i; ++j) {
      HalfPlane bisector;
      const double determinant = cross(lines[i].direction, lines[j].direction);
      if (std::fabs(determinant) <= kEpsilon) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;  // same direction
        bisector.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        bisector.point = lines[i].point +
                         lines[i].direction * (cross(lines[j].direction, lines[i].point - lines[j].point) / determinant);
      }
      bisector.direction = normalized(lines[j].direction - lines[i].direction);
      projected.push_back(bisector);
    }
    const Vec2 previous = result;
    const Vec2 inward{-lines[i].direction.y, lines[i].direction.x};
    if (solve_lp(projected, radius, inward, true, result) < projected.size()) {
      result = previous;  // numerical trouble only; keep the last feasible answer
    }
    worst = cross(lines[i].direction, lines[i].point - result);
  }
}

HalfPlane neighbor_constraint(const RvoAgent& agent, const RvoNeighbor& other, const RvoOptions& options) {
  const double inv_horizon = 1.0 / options.time_horizon;
  const Vec2 relative_position = other.position - agent.position;
  const Vec2 relative_velocity = agent.velocity - other.velocity;
  const double dist_sq = norm_sq(relative_position);
  const double combined = agent.radius + other.radius;
  const double combined_sq = combined * combined;

  HalfPlane line;
  Vec2 u;
  if (dist_sq > combined_sq) {
    const Vec2 w = relative_velocity - relative_position * inv_horizon;  // from cutoff center
    const double w_length_sq = norm_sq(w);
    const double along = dot(w, relative_position);
    if (along < 0.0 && along * along > combined_sq * w_length_sq) {
      // Closest boundary point is on the truncation circle.
      const double w_length = std::sqrt(w_length_sq);
      const Vec2 unit_w = w / w_length;
      line.direction = {unit_w.y, -unit_w.x};
      u = unit_w * (combined * inv_horizon - w_length);
    } else {
      const double leg = std::sqrt(dist_sq - combined_sq);
      if (cross(relative_position, w) > 0.0) {
        line.direction = Vec2{relative_position.x * leg - relative_position.y * combined,
                              relative_position.x * combined + relative_position.y * leg} /
                         dist_sq;
      } else {
        line.direction = -Vec2{relative_position.x * leg + relative_position.y * combined,
                               -relative_position.x * combined + relative_position.y * leg} /
                         dist_sq;
      }
      u = line.direction * dot(relative_velocity, line.direction) - relative_velocity;
    }
  } else {
    // Already overlapping: push apart within one time step.
    const double inv_step = 1.0 / options.time_step;
    const Vec2 w = relative_velocity - relative_position * inv_step;
    double w_length = norm(w);
    Vec2 unit_w = w_length > 0.0 ? w / w_length : normalized(-relative_position);
    if (w_length == 0.0 && norm_sq(unit_w) == 0.0) unit_w = {1.0, 0.0};  // coincident centers
    line.direction = {unit_w.y, -unit_w.x};
    u = unit_w * (combined * inv_step - w_length);
  }
  line.point = agent.velocity + u * (other.reciprocal ? 0.5 : 1.0);
  return line;
}

}  // namespace

RvoConstraints build_constraints(const RvoAgent& agent, std::span<const RvoNeighbor> neighbors,
                                 const RvoOptions& options) {
  RvoConstraints c;
  if (options.bounds) {
    const RvoBounds& b = *options.bounds;
    const double t = options.wall_time;
    const double x_hi = (b.max.x - agent.position.x) / t, x_lo = (b.min.x - agent.position.x) / t;
    const double y_hi = (b.max.y - agent.position.y) / t, y_lo = (b.min.y - agent.position.y) / t;
    c.walls.push_back({{x_hi, 0.0}, {0.0, 1.0}});   // vx <= x_hi
    c.walls.push_back({{x_lo, 0.0}, {0.0, -1.0}});  // vx >= x_lo
    c.walls.push_back({{0.0, y_hi}, {-1.0, 0.0}});  // vy <= y_hi
    c.walls.push_back({{0.0, y_lo}, {1.0, 0.0}});   // vy >= y_lo
  }
  c.neighbors.reserve(neighbors.size());
  for (const RvoNeighbor& n : neighbors) c.neighbors.push_back(neighbor_constraint(agent, n, options));
  return c;
}

Vec2 resolve_velocity(const RvoAgent& agent, std::span<const RvoNeighbor> neighbors, Vec2 preferred,
                      const RvoOptions& options) {
  const RvoConstraints c = build_constraints(agent, neighbors, options);
  if (c.walls.empty() && c.neighbors.empty()) {
    return norm(preferred) > agent.max_speed ? normalized(preferred) * agent.max_speed : preferred;
  }
  std::vector<HalfPlane> lines = c.walls;
  lines.insert(lines.end(), c.neighbors.begin(), c.neighbors.end());
  Vec2 result;
  const std::size_t failed = solve_lp(lines, agent.max_speed, preferred, false, result);
  if (failed < lines.size()) solve_least_penetration(lines, c.walls.size(), failed, agent.max_speed, result);
  return result;
}

}  // namespace shapebots
