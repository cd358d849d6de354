#include "shapebots/compare.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "shapebots/error.hpp"
#include "shapebots/render.hpp"

namespace shapebots {

namespace {

constexpr double kMargin = 100.0;  // wall to grid
constexpr double kClear = 200.0;   // wall to drawing; room for two lanes of traffic
constexpr double kGap = 120.0;     // grid to drawing
constexpr double kSpacing = 80.0;  // grid pitch

struct Fitted {
  std::vector<Polyline> contours;
  double width;
  double height;
  Vec2 grid_lo;
  Vec2 grid_hi;
};

Fitted fit(const std::vector<Polyline>& contours, std::size_t max_n, const CompareOptions& o) {
  if (contours.empty()) throw InvalidArgument("nothing to compare: no contours");
  double perimeter = 0.0;
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = lo * -1.0;
  for (const Polyline& pl : contours) {
    perimeter += pl.perimeter();
    for (Vec2 p : pl.points()) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  }
  const double scale = o.perimeter_per_robot * static_cast<double>(max_n) / perimeter;
  const Vec2 size = (hi - lo) * scale;

  Fitted f;
  f.width = std::max(size.x + 2 * kClear, 600.0);
  const auto per_row = static_cast<std::size_t>(std::floor((f.width - 2 * kMargin) / kSpacing)) + 1;
  const std::size_t rows = (max_n + per_row - 1) / per_row;
  const double band = static_cast<double>(rows - 1) * kSpacing;
  f.grid_lo = {kMargin, kMargin};
  f.grid_hi = {f.width - kMargin, kMargin + band};
  f.height = kMargin + band + kGap + size.y + kClear;
  const Vec2 origin{(f.width - size.x) / 2.0, kMargin + band + kGap};
  for (const Polyline& pl : contours) {
    std::vector<Vec2> pts;
    for (Vec2 p : pl.points()) pts.push_back(origin + (p - lo) * scale);
    f.contours.emplace_back(std::move(pts), pl.closed());
  }
  return f;
}

std::size_t largest(const CompareOptions& o) {
  if (o.counts.empty()) throw InvalidArgument("no robot counts to compare");
  return *std::max_element(o.counts.begin(), o.counts.end());
}

}  // namespace

Scenario comparison_scenario(const std::vector<Polyline>& contours, std::size_t n, RenderMode mode,
                             const CompareOptions& options) {
  if (n == 0) throw InvalidArgument("robot count must be positive");
  const Fitted f = fit(contours, std::max(n, largest(options)), options);
  Scenario s;
  s.name = options.label + "-" + std::string(to_string(mode)) + "-" + std::to_string(n);
  s.params = options.params;
  s.params.world_width = f.width;
  s.params.world_height = f.height;
  s.params.seed = options.seed;
  s.time_limit = options.time_limit;
  s.robots = make_robots(grid_layout(n, f.grid_lo, f.grid_hi, kSpacing), {Mount::Horizontal});
  SvgContour shape;
  shape.contours = f.contours;
  shape.mode = mode;
  s.frames.push_back(shape);
  return s;
}

const CompareCase* CompareReport::find(std::size_t n, RenderMode mode) const {
  for (const CompareCase& c : cases) {
    if (c.n == n && c.mode == mode) return &c;
  }
  return nullptr;
}

bool CompareReport::line_not_worse() const {
  for (const CompareCase& c : cases) {
    if (c.mode != RenderMode::Line) continue;
    const CompareCase* p = find(c.n, RenderMode::Point);
    if (!p) continue;
    if (!c.coverage_error || !p->coverage_error) return false;
    if (*c.coverage_error > *p->coverage_error) return false;
  }
  return true;
}

nlohmann::json CompareReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const CompareCase& c : cases) {
    nlohmann::json r{{"n", c.n},
                     {"mode", to_string(c.mode)},
                     {"completed", c.completed},
                     {"coverage_error", nullptr},
                     {"makespan", c.makespan},
                     {"min_separation", nullptr}};
    if (c.coverage_error) r["coverage_error"] = *c.coverage_error;
    if (c.min_separation) r["min_separation"] = *c.min_separation;
    if (!c.image.empty()) r["image"] = c.image.filename().string();
    rows.push_back(r);
  }
  return {{"v", 1},
          {"shape", label},
          {"world", {world_width, world_height}},
          {"cases", rows},
          {"line_not_worse", line_not_worse()}};
}

std::string CompareReport::table() const {
  std::string out = label + "\n  n   line_mm   point_mm   line<=point\n";
  std::vector<std::size_t> ns;
  for (const CompareCase& c : cases) {
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
  }
  auto cell = [](const CompareCase* c) -> std::string {
    if (!c || !c->coverage_error) return "         -";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%10.2f%s", *c->coverage_error, c->completed ? "" : "*");
    return buf;
  };
  for (std::size_t n : ns) {
    const CompareCase* l = find(n, RenderMode::Line);
    const CompareCase* p = find(n, RenderMode::Point);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%3zu", n);
    std::string verdict = "-";
    if (l && p && l->coverage_error && p->coverage_error) {
      verdict = *l->coverage_error <= *p->coverage_error ? "yes" : "NO";
    }
    out += std::string(buf) + cell(l) + " " + cell(p) + "   " + verdict + "\n";
  }
  return out;
}

CompareReport compare(const std::vector<Polyline>& contours, const CompareOptions& options) {
  const Fitted f = fit(contours, largest(options), options);
  CompareReport report;
  report.label = options.label;
  report.world_width = f.width;
  report.world_height = f.height;
  for (std::size_t n : options.counts) {
    for (RenderMode m : options.modes) report.cases.push_back({n, m, false, std::nullopt, 0.0, std::nullopt, {}});
  }

  std::vector<std::string> errors(report.cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.cases.size(); i = next++) {
      CompareCase& c = report.cases[i];
      try {
        const Scenario s = comparison_scenario(contours, c.n, c.mode, options);
        const RunResult r = run_scenario(s);
        c.completed = r.metrics.completed;
        c.coverage_error = r.metrics.coverage_error;
        c.makespan = r.metrics.makespan;
        c.min_separation = r.metrics.min_separation;
        if (!options.image_dir.empty()) {
          c.image = options.image_dir / (s.name + ".svg");
          const std::vector<TrajectoryRecord> last = snapshot_records(r.final_world);
          write_text_file(c.image, render_frame(last, r.reference, r.final_world.objects, s.params));
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(report.cases.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::string& e : errors) {
    if (!e.empty()) throw Error("comparison run failed: " + e);
  }
  return report;
}

}  // namespace shapebots
