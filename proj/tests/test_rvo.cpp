#include <cmath>

#include "doctest.h"
#include "shapebots/rvo.hpp"

using namespace shapebots;

namespace {

bool permitted(const HalfPlane& h, Vec2 v) { return cross(h.direction, v - h.point) >= -1e-6; }

// Closest approach of two discs moving at constant velocity over [0, T].
double closest_approach(Vec2 pa, Vec2 va, Vec2 pb, Vec2 vb, double T) {
  const Vec2 dp = pb - pa, dv = vb - va;
  const double t = norm_sq(dv) > 0 ? std::clamp(-dot(dp, dv) / norm_sq(dv), 0.0, T) : 0.0;
  return norm(dp + dv * t);
}

}  // namespace

TEST_CASE("free agent gets its preferred velocity, capped") {
  const RvoAgent a{{0, 0}, {}, 25, 170};
  CHECK(resolve_velocity(a, {}, {100, 0}, {}) == Vec2{100, 0});
  const Vec2 v = resolve_velocity(a, {}, {300, 400}, {});
  CHECK(norm(v) == doctest::Approx(170));
  CHECK(v.x / v.y == doctest::Approx(0.75));
}

TEST_CASE("head-on pair passes without contact") {
  Vec2 pa{0, 0}, pb{400, 1};
  Vec2 va{}, vb{};
  double closest = INFINITY;
  const RvoOptions opt;
  for (int step = 0; step < 40; ++step) {
    const RvoNeighbor nb{pb, vb, 26, true}, na{pa, va, 26, true};
    const RvoAgent a{pa, va, 26, 170}, b{pb, vb, 26, 170};
    const Vec2 goal_a{400, 0}, goal_b{0, 0};
    const Vec2 new_va = resolve_velocity(a, std::span(&nb, 1), normalized(goal_a - pa) * 170.0, opt);
    const Vec2 new_vb = resolve_velocity(b, std::span(&na, 1), normalized(goal_b - pb) * 170.0, opt);
    closest = std::min(closest, closest_approach(pa, new_va, pb, new_vb, 0.151));
    va = new_va, vb = new_vb;
    pa += va * 0.151, pb += vb * 0.151;
  }
  CHECK(closest >= 52 - 0.5);
  // And they got past each other.
  CHECK(pa.x > pb.x);
}

TEST_CASE("non-reciprocal obstacle: the agent does all the avoiding") {
  const RvoAgent a{{0, 0}, {170, 0}, 26, 170};
  const RvoNeighbor parked{{100, 0}, {}, 26, false};
  const Vec2 v = resolve_velocity(a, std::span(&parked, 1), {170, 0}, {});
  CHECK(closest_approach({0, 0}, v, {100, 0}, {}, 2.0) >= 52 - 1e-6);
  const auto c = build_constraints(a, std::span(&parked, 1), {});
  REQUIRE(c.neighbors.size() == 1);
  CHECK(permitted(c.neighbors[0], v));
}

TEST_CASE("reciprocal constraint only asks for half the effort") {
  const RvoAgent a{{0, 0}, {100, 0}, 25, 170};
  const RvoNeighbor rec{{100, 0}, {-100, 0}, 25, true};
  const RvoNeighbor fixed{{100, 0}, {-100, 0}, 25, false};
  const auto half = build_constraints(a, std::span(&rec, 1), {}).neighbors[0];
  const auto full = build_constraints(a, std::span(&fixed, 1), {}).neighbors[0];
  // Both half-planes are parallel; the reciprocal one is the looser.
  CHECK(std::fabs(cross(half.direction, full.direction)) < 1e-9);
  CHECK(permitted(half, full.point));
}

TEST_CASE("bounds keep the agent inside the world") {
  RvoOptions opt;
  opt.bounds = RvoBounds{{25, 25}, {1125, 715}};
  const RvoAgent a{{30, 300}, {}, 25, 170};
  const Vec2 v = resolve_velocity(a, {}, {-170, 0}, opt);
  CHECK(30 + v.x * opt.wall_time >= 25 - 1e-9);
}

TEST_CASE("overlapping agents separate") {
  const RvoAgent a{{0, 0}, {}, 25, 170};
  const RvoNeighbor n{{30, 0}, {}, 25, false};
  const Vec2 v = resolve_velocity(a, std::span(&n, 1), {}, {});
  CHECK(v.x < 0);
}

TEST_CASE("infeasible crowd: still bounded by max speed") {
  const RvoAgent a{{0, 0}, {}, 25, 170};
  std::vector<RvoNeighbor> ring;
  for (int k = 0; k < 8; ++k) ring.push_back({unit_from_angle(k * 0.785398) * 52.0, {}, 25, false});
  const Vec2 v = resolve_velocity(a, ring, {170, 0}, {});
  CHECK(norm(v) <= 170 + 1e-9);
  CHECK(std::isfinite(v.x));
}
