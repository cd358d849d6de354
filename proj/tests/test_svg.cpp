#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "shapebots/error.hpp"
#include "shapebots/svg.hpp"

using namespace shapebots;

namespace {

Vec2 cubic_at(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double t) {
  const double u = 1 - t;
  return p0 * (u * u * u) + p1 * (3 * u * u * t) + p2 * (3 * u * t * t) + p3 * (t * t * t);
}

// Largest distance from the dense curve to the polyline and back.
double hausdorff(const std::vector<Vec2>& dense, const Polyline& line) {
  double worst = 0;
  for (Vec2 q : dense) worst = std::max(worst, line.distance_to(q));
  for (Vec2 v : line.points()) {
    double best = INFINITY;
    for (Vec2 q : dense) best = std::min(best, distance(v, q));
    worst = std::max(worst, best);
  }
  return worst;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cubic flattening stays within tolerance of the curve") {
  const Vec2 p0{0, 0}, p1{30, 120}, p2{170, -60}, p3{200, 50};
  std::vector<Vec2> dense;
  for (int i = 0; i <= 20000; ++i) dense.push_back(cubic_at(p0, p1, p2, p3, i / 20000.0));
  for (double tol : {2.0, 1.0, 0.25}) {
    const auto pts = flatten_cubic(p0, p1, p2, p3, tol);
    CHECK(pts.front() == p0);
    CHECK(pts.back() == p3);
    CHECK(hausdorff(dense, Polyline(pts, false)) <= tol);
  }
  CHECK(flatten_cubic(p0, p1, p2, p3, 0.25).size() > flatten_cubic(p0, p1, p2, p3, 2.0).size());
  CHECK_THROWS_AS(flatten_cubic(p0, p1, p2, p3, 0.0), InvalidArgument);
}

TEST_CASE("quadratic flattening, including as an elevated cubic") {
  const Vec2 a{0, 0}, c{50, 100}, b{100, 0};
  std::vector<Vec2> dense;
  // A quadratic is the cubic with control points a + 2/3(c - a), b + 2/3(c - b).
  for (int i = 0; i <= 20000; ++i) dense.push_back(cubic_at(a, a + (c - a) * (2.0 / 3), b + (c - b) * (2.0 / 3), b, i / 20000.0));
  const auto pts = flatten_quadratic(a, c, b, 0.5);
  CHECK(hausdorff(dense, Polyline(pts, false)) <= 0.5);
}

TEST_CASE("straight segments and shapes") {
  const auto lines = parse_svg(R"(<svg>
    <rect x="10" y="20" width="100" height="50"/>
    <line x1="0" y1="0" x2="30" y2="40"/>
    <polyline points="0,0 10,0 10,10"/>
    <polygon points="0 0 10 0 10 10"/>
    <path d="M 0 0 H 10 V 10 h -10 z"/>
  </svg>)");
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].closed());
  CHECK(lines[0].perimeter() == doctest::Approx(300));
  CHECK(lines[1].perimeter() == doctest::Approx(50));
  CHECK_FALSE(lines[2].closed());
  CHECK(lines[3].closed());
  CHECK(lines[4].closed());
  CHECK(lines[4].perimeter() == doctest::Approx(40));
}

TEST_CASE("relative commands, implicit linetos and subpaths") {
  const auto lines = parse_svg(R"(<svg><path d="m 10 10 20 0 0 20 M 100 100 l 5 0 z"/></svg>)");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].points().back() == Vec2{30, 30});
  CHECK(lines[1].closed());
}

TEST_CASE("scale to millimeters") {
  SvgOptions o;
  o.mm_per_unit = 2.5;
  const auto lines = parse_svg(R"(<svg><line x1="0" y1="0" x2="10" y2="0" /></svg>)", o);
  CHECK(lines[0].perimeter() == doctest::Approx(25));
}

TEST_CASE("elements inside defs are not drawn") {
  const auto lines = parse_svg(R"(<svg><defs><path d="M0 0 L 10 0"/></defs><path d="M0 0 L 5 0"/></svg>)");
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].perimeter() == doctest::Approx(5));
}

TEST_CASE("malformed documents carry a byte offset") {
  try {
    parse_svg("<svg><path d=\"M 0 0 L 1\"/></svg>");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() > 10);
  }
  CHECK_THROWS_AS(parse_svg("<svg><path d=\"M 0 0\">"), ParseError);
  CHECK_THROWS_AS(parse_svg("<svg></g>"), ParseError);
  CHECK_THROWS_AS(parse_svg(""), ParseError);
  CHECK_THROWS_AS(parse_svg("<svg><path d=\"L 0 0\"/></svg>"), ParseError);
  CHECK_THROWS_AS(parse_svg("<svg><path d=\"M 0 0 X 1 1\"/></svg>"), ParseError);
}

TEST_CASE("unsupported features are named") {
  try {
    parse_svg(R"(<svg><path d="M 0 0 A 10 10 0 0 1 20 0"/></svg>)");
    FAIL("expected UnsupportedFeature");
  } catch (const UnsupportedFeature& e) {
    CHECK(e.feature() == "path command A");
    CHECK(e.offset() == 20);
  }
  CHECK_THROWS_AS(parse_svg(R"(<svg><path d="M 0 0 S 1 1 2 2"/></svg>)"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_svg(R"(<svg><path d="M 0 0 T 2 2"/></svg>)"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_svg(R"(<svg><rect width="10mm" height="5"/></svg>)"), UnsupportedFeature);
  CHECK_NOTHROW(parse_svg(R"(<svg><rect width="10px" height="5"/></svg>)"));
}

TEST_CASE("bezier corpus matches its analytic curves") {
  const auto curves = nlohmann::json::parse(slurp(SHAPEBOTS_TEST_DATA "/bezier_corpus.json"));
  const auto lines = parse_svg(slurp(SHAPEBOTS_TEST_DATA "/bezier_corpus.svg"));
  REQUIRE(lines.size() == 20);
  for (std::size_t k = 0; k < 20; ++k) {
    CAPTURE(k);
    CHECK(lines[k].closed() == curves[k]["closed"].get<bool>());
    std::vector<Vec2> dense;
    for (const auto& seg : curves[k]["segments"]) {
      std::vector<Vec2> c;
      for (const auto& p : seg["points"]) c.push_back({p[0].get<double>(), p[1].get<double>()});
      if (c.size() == 3) c = {c[0], c[0] + (c[1] - c[0]) * (2.0 / 3), c[2] + (c[1] - c[2]) * (2.0 / 3), c[2]};
      for (int i = 0; i <= 5000; ++i) dense.push_back(cubic_at(c[0], c[1], c[2], c[3], i / 5000.0));
    }
    if (lines[k].closed()) {
      const Vec2 a = dense.back(), b = dense.front();
      for (int i = 1; i < 500; ++i) dense.push_back(a + (b - a) * (i / 500.0));
    }
    CHECK(hausdorff(dense, lines[k]) <= 1.0);
  }
}
