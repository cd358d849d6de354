#include "shapebots/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "shapebots/error.hpp"

namespace shapebots {

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("wrap_angle: non-finite angle");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(theta, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

double angle_difference(double to, double from) { return wrap_angle(to - from); }

Pose normalized_pose(Pose p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("pose: non-finite position");
  p.theta = wrap_angle(p.theta);
  return p;
}

double Segment::orientation() const {
  const Vec2 d = b - a;
  if (norm_sq(d) == 0.0) return 0.0;
  return wrap_angle(std::atan2(d.y, d.x));
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) noexcept {
  const Vec2 ab = b - a;
  const double len_sq = norm_sq(ab);
  if (len_sq == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
  return a + ab * t;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept {
  return distance(p, closest_point_on_segment(p, a, b));
}

double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) noexcept {
  const double d1 = cross(a1 - a0, b0 - a0), d2 = cross(a1 - a0, b1 - a0);
  const double d3 = cross(b1 - b0, a0 - b0), d4 = cross(b1 - b0, a1 - b0);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return 0.0;
  }
  return std::min({distance_to_segment(a0, b0, b1), distance_to_segment(a1, b0, b1),
                   distance_to_segment(b0, a0, a1), distance_to_segment(b1, a0, a1)});
}

namespace {

bool valid_chain(const std::vector<Vec2>& pts, bool closed) {
  if (pts.size() < 2) return false;
  for (const Vec2& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (distance(pts[i], pts[i + 1]) <= Polyline::kMinSpacing) return false;
  }
  if (closed && distance(pts.back(), pts.front()) <= Polyline::kMinSpacing) return false;
  return true;
}

}  // namespace

Polyline::Polyline(std::vector<Vec2> points, bool closed) : points_(std::move(points)), closed_(closed) {
  if (!valid_chain(points_, closed_)) {
    throw InvalidArgument("polyline needs >= 2 finite points with no coincident neighbours");
  }
  cumulative_.resize(edge_count() + 1, 0.0);
  for (std::size_t i = 0; i < edge_count(); ++i) cumulative_[i + 1] = cumulative_[i] + edge(i).length();
}

std::optional<Polyline> Polyline::try_make(std::vector<Vec2> points, bool closed) {
  std::vector<Vec2> cleaned;
  cleaned.reserve(points.size());
  for (const Vec2& p : points) {
    if (cleaned.empty() || distance(cleaned.back(), p) > kMinSpacing) cleaned.push_back(p);
  }
  if (closed) {
    while (cleaned.size() > 1 && distance(cleaned.back(), cleaned.front()) <= kMinSpacing) cleaned.pop_back();
  }
  if (!valid_chain(cleaned, closed)) return std::nullopt;
  return Polyline(std::move(cleaned), closed);
}

double Polyline::perimeter() const noexcept { return cumulative_[edge_count()]; }

std::size_t Polyline::locate(double& s) const {
  const double total = perimeter();
  if (closed_) {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
  } else {
    s = std::clamp(s, 0.0, total);
  }
  const std::size_t edges = edge_count();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cumulative_.begin()) - 1));
  return std::min(i, edges - 1);
}

Vec2 Polyline::point_at(double s) const {
  const std::size_t i = locate(s);
  const Segment e = edge(i);
  const double len = e.length();
  const double t = std::clamp((s - cumulative_[i]) / len, 0.0, 1.0);
  return e.a + (e.b - e.a) * t;
}

double Polyline::tangent_at(double s) const { return edge(locate(s)).orientation(); }

std::vector<Vec2> Polyline::sample(double step) const {
  if (!(step > 0.0)) throw InvalidArgument("sample step must be positive");
  const double total = perimeter();
  const auto count = static_cast<std::size_t>(std::floor(total / step));
  std::vector<Vec2> out;
  out.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) {
    const double s = static_cast<double>(k) * step;
    if (closed_ && s >= total) break;
    out.push_back(point_at(s));
  }
  if (!closed_ && distance(out.back(), points_.back()) > 1e-12) out.push_back(points_.back());
  return out;
}

double Polyline::distance_to(Vec2 p) const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < edge_count(); ++i) {
    const Segment e = edge(i);
    best = std::min(best, distance_to_segment(p, e.a, e.b));
  }
  return best;
}

double distance_to_polylines(Vec2 p, std::span<const Polyline> lines) noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const Polyline& l : lines) best = std::min(best, l.distance_to(p));
  return best;
}

}  // namespace shapebots
