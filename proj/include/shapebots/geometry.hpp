#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace shapebots {

/// Planar vector in millimeters (or mm/s when used as a velocity).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const noexcept { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const noexcept { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) noexcept { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
constexpr double norm_sq(Vec2 v) noexcept { return dot(v, v); }
inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }
inline Vec2 unit_from_angle(double theta) noexcept { return {std::cos(theta), std::sin(theta)}; }
inline double heading_of(Vec2 v) noexcept { return std::atan2(v.y, v.x); }
inline Vec2 normalized(Vec2 v) noexcept {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec2{};
}
inline Vec2 rotated(Vec2 v, double theta) noexcept {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi]. Throws InvalidArgument on non-finite input.
double wrap_angle(double theta);

/// Shortest signed rotation taking `from` onto `to`, in (-pi, pi].
double angle_difference(double to, double from);

inline constexpr double deg_to_rad(double deg) noexcept { return deg * 3.14159265358979323846 / 180.0; }
inline constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / 3.14159265358979323846; }

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< radians, kept in (-pi, pi]

  Vec2 position() const noexcept { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

/// Returns `p` with its heading wrapped; throws on non-finite components.
Pose normalized_pose(Pose p);

struct Segment {
  Vec2 a;
  Vec2 b;

  double length() const noexcept { return distance(a, b); }
  Vec2 midpoint() const noexcept { return (a + b) * 0.5; }
  double orientation() const;
};

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept;
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) noexcept;
/// Minimum distance between segments [a0,a1] and [b0,b1].
double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) noexcept;

/// Ordered point chain. Holds at least two points, with no two consecutive
/// points (including last->first when closed) closer than `kMinSpacing`.
class Polyline {
 public:
  static constexpr double kMinSpacing = 1e-9;

  /// Throws InvalidArgument if the invariants do not hold.
  Polyline(std::vector<Vec2> points, bool closed);

  /// Drops coincident consecutive points first; empty when fewer than two
  /// distinct points remain.
  static std::optional<Polyline> try_make(std::vector<Vec2> points, bool closed);

  const std::vector<Vec2>& points() const noexcept { return points_; }
  bool closed() const noexcept { return closed_; }
  std::size_t edge_count() const noexcept { return closed_ ? points_.size() : points_.size() - 1; }
  Segment edge(std::size_t i) const noexcept {
    return {points_[i], points_[(i + 1) % points_.size()]};
  }
  double perimeter() const noexcept;

  /// Point at arc length `s` from the first vertex. Closed polylines wrap;
  /// open ones clamp to the ends.
  Vec2 point_at(double s) const;
  /// Unit tangent direction (radians) of the edge containing arc length `s`.
  double tangent_at(double s) const;
  /// Points at arc-length steps of `step` (always includes the start; includes
  /// the end point of open polylines).
  std::vector<Vec2> sample(double step) const;
  double distance_to(Vec2 p) const noexcept;

 private:
  std::size_t locate(double& s) const;

  std::vector<Vec2> points_;
  bool closed_ = false;
  std::vector<double> cumulative_;  // cumulative_[i] = arc length at vertex i
};

double distance_to_polylines(Vec2 p, std::span<const Polyline> lines) noexcept;

}  // namespace shapebots
