#include <algorithm>
#include <cmath>

#include "shapebots/engine.hpp"

namespace shapebots {

namespace {

constexpr double kContactEps = 1e-12;

struct Pusher {
  Vec2 a;
  Vec2 b;
  double radius;
  Vec2 fallback;  // push direction when the disc center sits on the core
};

std::vector<Pusher> pushers_of(const WorldState& world, const SimParams& params) {
  std::vector<Pusher> out;
  for (const RobotState& r : world.robots) {
    if (!r.present) continue;
    const Footprint fp = footprint(r, params);
    const Vec2 side = unit_from_angle(r.pose.theta + 1.5707963267948966);
    out.push_back({fp.center, fp.center, fp.body_radius, unit_from_angle(r.pose.theta)});
    for (const Capsule& c : fp.capsules) out.push_back({c.a, c.b, c.radius, side});
  }
  return out;
}

double penetration(const DiscObject& d, const Pusher& p, Vec2* normal) {
  const Vec2 q = closest_point_on_segment(d.center, p.a, p.b);
  const Vec2 off = d.center - q;
  const double dist = norm(off);
  if (normal) *normal = dist > kContactEps ? off * (1.0 / dist) : p.fallback;
  return p.radius + d.radius - dist;
}

bool clamp_to_world(DiscObject& d, const SimParams& params) {
  const Vec2 before = d.center;
  d.center.x = std::clamp(d.center.x, d.radius, params.world_width - d.radius);
  d.center.y = std::clamp(d.center.y, d.radius, params.world_height - d.radius);
  return before.x != d.center.x || before.y != d.center.y;
}

bool pinned(double v, double lo, double hi) { return v <= lo + kContactEps || v >= hi - kContactEps; }

// A disc held against one wall slides along it: solve for the position on the
// wall line that just touches the pusher.
void slide_along_wall(DiscObject& d, const Pusher& p, const SimParams& params) {
  const bool px = pinned(d.center.x, d.radius, params.world_width - d.radius);
  const bool py = pinned(d.center.y, d.radius, params.world_height - d.radius);
  if (px == py) return;  // free, or wedged in a corner
  const double reach = p.radius + d.radius;
  for (int it = 0; it < 8; ++it) {
    Vec2 n;
    if (penetration(d, p, &n) <= kContactEps) return;
    const Vec2 q = closest_point_on_segment(d.center, p.a, p.b);
    const double fixed_gap = px ? d.center.x - q.x : d.center.y - q.y;
    const double need = reach * reach - fixed_gap * fixed_gap;
    if (need <= 0.0) return;
    double& free = px ? d.center.y : d.center.x;
    const double qf = px ? q.y : q.x;
    const double hint = px ? n.y : n.x;
    const double sign = free - qf > kContactEps ? 1.0 : free - qf < -kContactEps ? -1.0 : (hint >= 0.0 ? 1.0 : -1.0);
    free = qf + sign * std::sqrt(need);
    clamp_to_world(d, params);
  }
}

}  // namespace

double push_objects(WorldState& world, const SimParams& params) {
  if (world.objects.empty()) return 0.0;
  const std::vector<Pusher> pushers = pushers_of(world, params);
  auto& objs = world.objects;

  for (int pass = 0; pass < params.max_push_passes; ++pass) {
    bool moved = false;
    for (DiscObject& d : objs) {
      if (!d.pushable) continue;
      for (const Pusher& p : pushers) {
        Vec2 n;
        const double pen = penetration(d, p, &n);
        if (pen > kContactEps) {
          d.center = d.center + n * pen;
          moved = true;
        }
      }
      if (clamp_to_world(d, params)) {
        moved = true;
        for (const Pusher& p : pushers) slide_along_wall(d, p, params);
      }
    }
    // A disc held by a robot or a wall yields nothing to a neighbor; without
    // this a chain only converges by halves each pass.
    std::vector<char> held(objs.size(), 0);
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const DiscObject& d = objs[i];
      if (!d.pushable) continue;
      held[i] = pinned(d.center.x, d.radius, params.world_width - d.radius) ||
                pinned(d.center.y, d.radius, params.world_height - d.radius);
      for (const Pusher& p : pushers) held[i] |= penetration(d, p, nullptr) > -1e-9;
    }
    for (std::size_t i = 0; i < objs.size(); ++i) {
      for (std::size_t j = i + 1; j < objs.size(); ++j) {
        DiscObject& a = objs[i];
        DiscObject& b = objs[j];
        const bool a_moves = a.pushable && !(held[i] && b.pushable && !held[j]);
        const bool b_moves = b.pushable && !(held[j] && a.pushable && !held[i]);
        if (!a_moves && !b_moves) continue;
        const Vec2 off = b.center - a.center;
        const double dist = norm(off);
        const double pen = a.radius + b.radius - dist;
        if (pen <= kContactEps) continue;
        const Vec2 n = dist > kContactEps ? off * (1.0 / dist) : Vec2{1.0, 0.0};
        if (a_moves && b_moves) {
          a.center = a.center - n * (pen / 2.0);
          b.center = b.center + n * (pen / 2.0);
        } else if (a_moves) {
          a.center = a.center - n * pen;
        } else {
          b.center = b.center + n * pen;
        }
        moved = true;
      }
    }
    if (!moved) break;
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const DiscObject& d = objs[i];
    if (!d.pushable) continue;
    for (const Pusher& p : pushers) worst = std::max(worst, penetration(d, p, nullptr));
    worst = std::max({worst, d.radius - d.center.x, d.center.x + d.radius - params.world_width,
                      d.radius - d.center.y, d.center.y + d.radius - params.world_height});
    for (std::size_t j = 0; j < objs.size(); ++j) {
      if (j != i) worst = std::max(worst, d.radius + objs[j].radius - distance(d.center, objs[j].center));
    }
  }
  return std::max(0.0, worst);
}

}  // namespace shapebots
