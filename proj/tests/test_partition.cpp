#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "shapebots/error.hpp"
#include "shapebots/partition.hpp"
#include "shapebots/rng.hpp"

using namespace shapebots;

namespace {

// Independent arc-length walk over the raw vertex list.
Vec2 walk(const std::vector<Vec2>& pts, bool closed, double s) {
  std::vector<Vec2> v = pts;
  if (closed) v.push_back(pts.front());
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double len = distance(v[i], v[i + 1]);
    if (s <= len) return v[i] + (v[i + 1] - v[i]) * (s / len);
    s -= len;
  }
  return v.back();
}

double length_of(const std::vector<Vec2>& pts, bool closed) {
  double total = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += distance(pts[i], pts[i + 1]);
  if (closed) total += distance(pts.back(), pts.front());
  return total;
}

}  // namespace

TEST_CASE("apportion follows largest remainder") {
  const std::vector<double> w{300, 100};
  CHECK(apportion(w, 4) == std::vector<std::size_t>{3, 1});
  const std::vector<double> w3{1, 1, 1};
  CHECK(apportion(w3, 4) == std::vector<std::size_t>{2, 1, 1});
  // A tiny contour still gets one.
  const std::vector<double> tiny{1000, 1};
  CHECK(apportion(tiny, 2) == std::vector<std::size_t>{1, 1});
  CHECK_THROWS_AS(apportion(w3, 2), Infeasible);
  for (std::size_t k = 3; k < 40; ++k) {
    const std::vector<double> ww{12.5, 300, 77};
    const auto c = apportion(ww, k);
    CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == k);
  }
}

TEST_CASE("square side 100 into four chords gives its edges") {
  const std::vector<Polyline> sq{Polyline({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, true)};
  const auto segs = partition_to_segments(sq, 4);
  REQUIRE(segs.size() == 4);
  CHECK(segs[0].a == Vec2{0, 0});
  CHECK(segs[0].b == Vec2{100, 0});
  CHECK(segs[3].b == Vec2{0, 0});
  for (const auto& s : segs) CHECK(s.length() == doctest::Approx(100));
}

TEST_CASE("single chord on closed and open contours") {
  const std::vector<Polyline> sq{Polyline({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, true)};
  const auto one = partition_to_segments(sq, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].b == Vec2{100, 100});
  const std::vector<Polyline> open{Polyline({{0, 0}, {50, 0}, {50, 50}}, false)};
  const auto o = partition_to_segments(open, 1);
  CHECK(o[0].a == Vec2{0, 0});
  CHECK(o[0].b == Vec2{50, 50});
}

TEST_CASE("chord endpoints match an independent arc-length walk") {
  RngSequence rng(5, CounterRng::stream(RngPurpose::Test, 2));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    const int nv = 3 + static_cast<int>(rng.below(8));
    for (int i = 0; i < nv; ++i) pts.push_back({rng.uniform(0, 500), rng.uniform(0, 500)});
    const bool closed = trial % 2 == 0;
    const std::vector<Polyline> c{Polyline(pts, closed)};
    const std::size_t k = 2 + rng.below(12);
    const auto segs = partition_to_segments(c, k);
    REQUIRE(segs.size() == k);
    const double total = length_of(pts, closed);
    for (std::size_t i = 0; i < k; ++i) {
      const Vec2 a = walk(pts, closed, total * i / k), b = walk(pts, closed, total * (i + 1) / k);
      CHECK(distance(segs[i].a, a) < 1e-6);
      CHECK(distance(segs[i].b, b) < 1e-6);
    }
  }
}

TEST_CASE("stations: exactly n, equally spaced") {
  const std::vector<Polyline> sq{Polyline({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, true)};
  const auto st = arc_length_stations(sq, 4);
  REQUIRE(st.size() == 4);
  CHECK(st[1].point == Vec2{100, 0});
  CHECK(st[1].tangent == doctest::Approx(std::numbers::pi / 2));
  CHECK(arc_length_stations(sq, 37).size() == 37);

  const std::vector<Polyline> open{Polyline({{0, 0}, {90, 0}}, false)};
  const auto so = arc_length_stations(open, 4);
  REQUIRE(so.size() == 4);
  CHECK(so[0].point == Vec2{0, 0});
  CHECK(so[1].point.x == doctest::Approx(30));
  CHECK(so[3].point.x == doctest::Approx(90));

  // Circle, two stations: antipodal.
  std::vector<Vec2> circle;
  for (int i = 0; i < 360; ++i) circle.push_back(unit_from_angle(deg_to_rad(i)) * 100.0);
  const std::vector<Polyline> c{Polyline(circle, true)};
  const auto two = arc_length_stations(c, 2);
  CHECK(distance(two[0].point, two[1].point) == doctest::Approx(200).epsilon(1e-3));
  CHECK_THROWS_AS(arc_length_stations(c, 0), InvalidArgument);
}
