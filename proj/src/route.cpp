#include "shapebots/route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace shapebots {

bool path_clear(Vec2 a, Vec2 b, std::span<const Capsule> obstacles) noexcept {
  for (const Capsule& o : obstacles) {
    const double ends = std::min(distance_to_segment(a, o.a, o.b), distance_to_segment(b, o.a, o.b));
    if (segment_distance(a, b, o.a, o.b) < std::min(ends, o.radius) - 1e-9) return false;
  }
  return true;
}

RouteGrid::RouteGrid(Vec2 world_size, double cell, double wall_gap)
    : cell_(cell),
      nx_(std::max(1, static_cast<int>(std::ceil(world_size.x / cell)))),
      ny_(std::max(1, static_cast<int>(std::ceil(world_size.y / cell)))),
      blocked_(static_cast<std::size_t>(nx_) * ny_, 0) {
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const Vec2 c = center(i, j);
      blocked_[j * nx_ + i] =
          c.x < wall_gap || c.y < wall_gap || c.x > world_size.x - wall_gap || c.y > world_size.y - wall_gap;
    }
  }
}

int RouteGrid::index_of(Vec2 p) const noexcept {
  const int i = std::clamp(static_cast<int>(std::floor(p.x / cell_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y / cell_)), 0, ny_ - 1);
  return j * nx_ + i;
}

void RouteGrid::block(const Capsule& o) {
  const int i0 = std::max(0, static_cast<int>(std::floor((std::min(o.a.x, o.b.x) - o.radius) / cell_)));
  const int i1 = std::min(nx_ - 1, static_cast<int>(std::floor((std::max(o.a.x, o.b.x) + o.radius) / cell_)));
  const int j0 = std::max(0, static_cast<int>(std::floor((std::min(o.a.y, o.b.y) - o.radius) / cell_)));
  const int j1 = std::min(ny_ - 1, static_cast<int>(std::floor((std::max(o.a.y, o.b.y) + o.radius) / cell_)));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (distance_to_segment(center(i, j), o.a, o.b) < o.radius) blocked_[j * nx_ + i] = 1;
    }
  }
}

bool RouteGrid::blocked(Vec2 p) const noexcept { return blocked_[index_of(p)] != 0; }


Vec2 RouteGrid::waypoint(Vec2 start, Vec2 goal, std::span<const Capsule> obstacles, double open_radius) const {
  if (path_clear(start, goal, obstacles)) return goal;

  const int g = index_of(goal);
  auto passable = [&](int c) {
    if (!blocked_[c] || c == g) return true;
    return distance(center(c % nx_, c / nx_), goal) <= open_radius;
  };
  auto heuristic = [&](int c) {
    const double dx = std::abs(c % nx_ - g % nx_), dy = std::abs(c / nx_ - g / nx_);
    return cell_ * (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
  };
  // A straight move that never gets closer to an obstacle than the robot
  // already is (or than its clearance, whichever is less). From inside a
  // clearance band this backs the robot out without squeezing it through
  // gaps it cannot fit.
  auto reachable = [&](Vec2 p) {
    for (const Capsule& o : obstacles) {
      const double now = distance_to_segment(start, o.a, o.b);
      if (segment_distance(start, p, o.a, o.b) < std::min(now, o.radius) - 1e-9) return false;
    }
    return true;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(blocked_.size(), inf);
  std::vector<int> parent(blocked_.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const int s = index_of(start);
  const int reach = static_cast<int>(std::ceil(open_radius / cell_)) + 1;
  for (int j = std::max(0, s / nx_ - reach); j <= std::min(ny_ - 1, s / nx_ + reach); ++j) {
    for (int i = std::max(0, s % nx_ - reach); i <= std::min(nx_ - 1, s % nx_ + reach); ++i) {
      const int c = j * nx_ + i;
      const Vec2 p = center(i, j);
      const double d = distance(p, start);
      if (d > open_radius + cell_ || !passable(c) || !reachable(p)) continue;
      cost[c] = d;
      open.push({d + heuristic(c), c});
    }
  }
  while (!open.empty()) {
    const auto [f, c] = open.top();
    open.pop();
    if (c == g) break;
    if (f > cost[c] + heuristic(c) + 1e-9) continue;
    const int ci = c % nx_, cj = c / nx_;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int i = ci + di, j = cj + dj;
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
        const int n = j * nx_ + i;
        if (!passable(n)) continue;
        // No corner cutting.
        if (di != 0 && dj != 0 && (!passable(cj * nx_ + i) || !passable(j * nx_ + ci))) continue;
        const double step = (di != 0 && dj != 0) ? cell_ * std::sqrt(2.0) : cell_;
        if (cost[c] + step < cost[n]) {
          cost[n] = cost[c] + step;
          parent[n] = c;
          open.push({cost[n] + heuristic(n), n});
        }
      }
    }
  }
  if (cost[g] == inf) return goal;

  // Walk back from the goal; the first point in plain sight is the farthest.
  std::vector<Vec2> path{goal};
  for (int c = parent[g]; c != -1; c = parent[c]) path.push_back(center(c % nx_, c / nx_));
  for (const Vec2& p : path) {
    if (path_clear(start, p, obstacles)) return p;
  }
  return path.back();
}

}  // namespace shapebots
