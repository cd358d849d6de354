// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.
//
//   acceptance [--data DIR] [--scenarios DIR] [--only NAME]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "shapebots/actuator.hpp"
#include "shapebots/assignment.hpp"
#include "shapebots/compare.hpp"
#include "shapebots/motion.hpp"
#include "shapebots/params.hpp"
#include "shapebots/rng.hpp"
#include "shapebots/scenario.hpp"
#include "shapebots/svg.hpp"

#ifndef SHAPEBOTS_TEST_DATA
#define SHAPEBOTS_TEST_DATA "tests/data"
#endif
#ifndef SHAPEBOTS_SCENARIO_DIR
#define SHAPEBOTS_SCENARIO_DIR "scenarios"
#endif

using namespace shapebots;
using Clock = std::chrono::steady_clock;

namespace {

std::string data_dir = SHAPEBOTS_TEST_DATA;
std::string scenario_dir = SHAPEBOTS_SCENARIO_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random starts and goals in the default world, as in the collision trials.
Scenario ten_robot_trial(std::uint64_t trial, const SimParams& base, double extension_lo, double extension_hi) {
  SimParams p = base;
  p.seed = trial;
  Scenario s;
  s.params = p;
  s.robots = make_robots(random_layout(10, p, 1000 + trial), {Mount::Horizontal, Mount::Vertical});
  ExplicitTargets targets;
  RngSequence rng(trial, CounterRng::stream(RngPurpose::Test, 77));
  for (const Pose& g : random_layout(10, p, 5000 + trial)) {
    const double ext = extension_lo == extension_hi ? extension_lo : rng.uniform(extension_lo, extension_hi);
    targets.entries.push_back({g, ext, Mount::Vertical, 0.0});
  }
  s.frames.push_back(targets);
  s.time_limit = 60.0;
  return s;
}

// --- assignment ------------------------------------------------------------

Verdict assignment_optimality() {
  const auto t0 = Clock::now();
  RngSequence rng(7, CounterRng::stream(RngPurpose::Test, 1));
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 7;
    std::vector<double> cost(n * n);
    // Every third matrix uses small integers so ties are common.
    for (double& c : cost) c = trial % 3 == 0 ? static_cast<double>(rng.below(5)) : rng.uniform(0.0, 1000.0);
    const CostMatrix m(n, n, cost);
    const Assignment a = solve_assignment(m);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double sum = 0.0;
      for (std::size_t t = 0; t < n; ++t) sum += m(perm[t], t);
      best = std::min(best, sum);
    } while (std::next_permutation(perm.begin(), perm.end()));

    double got = 0.0;
    for (std::size_t t = 0; t < n; ++t) got += m(a.robot_for_target[t], t);
    if (got != best || a.total_cost != got) ++mismatches;
  }
  const double wall = seconds_since(t0);
  return {mismatches == 0 && wall < 5.0, fmt("1000 matrices, %d mismatches, %.2f s", mismatches, wall)};
}

// --- collision -------------------------------------------------------------

Verdict collision_freedom() {
  const auto t0 = Clock::now();
  int failures = 0;
  double worst = INFINITY, slowest = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Engine engine = make_engine(ten_robot_trial(trial, SimParams{}, 25.0, 200.0));
    double closest = INFINITY;
    while (!engine.settled() && engine.time() < 60.0) {
      engine.step();
      const auto& r = engine.world().robots;
      for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = i + 1; j < r.size(); ++j)
          closest = std::min(closest, distance(r[i].pose.position(), r[j].pose.position()));
    }
    const bool all_holding = std::all_of(engine.world().robots.begin(), engine.world().robots.end(),
                                         [](const RobotState& r) { return r.phase == BehaviorPhase::Holding; });
    if (!engine.settled() || !all_holding || closest < 50.0) ++failures;
    worst = std::min(worst, closest);
    slowest = std::max(slowest, engine.settle_time().value_or(INFINITY));
  }
  const double wall = seconds_since(t0);
  return {failures == 0 && wall < 60.0,
          fmt("100 trials, %d failed, closest %.2f mm, slowest Holding at %.2f s, %.1f s wall", failures, worst,
              slowest, wall)};
}

// --- thresholds ------------------------------------------------------------

Verdict threshold_semantics() {
  const SimParams params;
  const double d_in = params.pos_threshold - 0.1, d_out = params.pos_threshold + 0.1;
  const double a_in = deg_to_rad(5.0 - 0.1), a_out = deg_to_rad(5.0 + 0.1);
  int checks = 0, wrong = 0;
  auto expect = [&](BehaviorPhase from, double dist, double bearing, double heading_err, BehaviorPhase want) {
    RobotState r;
    r.units = {ActuatorUnit{}};
    r.phase = from;
    const Pose goal{500.0, 400.0, deg_to_rad(30.0)};
    r.target = TargetEntry{goal, 100.0, Mount::Horizontal, 0.0};
    r.pose = {goal.x - dist * std::cos(bearing), goal.y - dist * std::sin(bearing), wrap_angle(goal.theta + heading_err)};
    ++checks;
    if (behavior_step(r, params, params.dt_control).phase != want) ++wrong;
  };
  using P = BehaviorPhase;
  for (int b = 0; b < 16; ++b) {
    const double bearing = b * std::numbers::pi / 8.0;
    for (double sign : {1.0, -1.0}) {
      expect(P::Navigating, d_out, bearing, sign * a_in, P::Navigating);
      expect(P::Navigating, d_out, bearing, sign * a_out, P::Navigating);
      expect(P::Navigating, d_in, bearing, sign * a_out, P::Orienting);
      expect(P::Navigating, d_in, bearing, sign * a_in, P::Transforming);
      expect(P::Orienting, d_in, bearing, sign * a_out, P::Orienting);
      expect(P::Orienting, d_in, bearing, sign * a_in, P::Transforming);
      expect(P::Orienting, d_out, bearing, sign * a_in, P::Orienting);
    }
  }
  return {wrong == 0, fmt("%d boundary cases at +/-0.1 mm and +/-0.1 deg, %d wrong", checks, wrong)};
}

// --- actuator --------------------------------------------------------------

Verdict actuator_timing() {
  const SimParams params;
  const ActuatorLimits limits = actuator_limits(params);
  ActuatorUnit unit;
  command_length(unit, limits.min + 100.0, limits);
  int ticks = 0;
  while (!motion_complete(unit, limits) && ticks < 100000) {
    unit = step_actuator(unit, params.dt_physics, ActuatorNoise{}, limits);
    ++ticks;
  }
  const double t = ticks * params.dt_physics;
  const bool timing_ok = std::fabs(t - 3.03) <= params.dt_physics + 1e-9 && unit.length == limits.min + 100.0;

  double sum = 0.0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    ActuatorUnit u;
    command_length(u, limits.min + 100.0, limits);
    const ActuatorNoise noise{params.actuator_sigma_rate, true, 42, trial};
    while (!motion_complete(u, limits)) u = step_actuator(u, params.dt_physics, noise, limits);
    sum += std::fabs(u.length - u.commanded_length);
  }
  const double mean = sum / 1000.0;
  const bool noise_ok = std::fabs(mean - 3.0) <= 0.5;
  return {timing_ok && noise_ok,
          fmt("100 mm in %.2f s (%d ticks); mean |error| over 1000 extensions %.3f mm", t, ticks, mean)};
}

// --- emergent accuracy -----------------------------------------------------

Verdict emergent_accuracy() {
  SimParams base;
  base.position_noise_sigma = 3.2;
  double pos_sum = 0.0, ang_sum = 0.0;
  int arrivals = 0;
  for (std::uint64_t trial = 0; arrivals < 1000 && trial < 1000; ++trial) {
    Engine engine = make_engine(ten_robot_trial(trial, base, 25.0, 25.0));
    engine.on_arrival = [&](const RobotState& r) {
      if (arrivals >= 1000) return;
      pos_sum += distance(r.pose.position(), r.target->goal.position());
      ang_sum += std::fabs(angle_difference(r.target->goal.theta, r.pose.theta));
      ++arrivals;
    };
    while (!engine.settled() && engine.time() < 60.0) engine.step();
  }
  const double pos = pos_sum / arrivals, ang = rad_to_deg(ang_sum / arrivals);
  return {arrivals == 1000 && std::fabs(pos - 3.2) <= 1.0 && ang <= 5.0,
          fmt("%d arrivals, mean position error %.3f mm, mean heading error %.3f deg", arrivals, pos, ang)};
}

// --- rendering comparison --------------------------------------------------

Verdict rendering_comparison() {
  const auto t0 = Clock::now();
  const char* names[] = {"fish", "heart", "wave"};
  int cases = 0, worse = 0, incomplete = 0;
  std::vector<double> line_mean(4, 0.0);
  const CompareOptions options;
  for (const char* name : names) {
    CompareOptions o = options;
    o.label = name;
    const CompareReport report = compare(parse_svg(slurp(data_dir + "/corpus/" + name + ".svg")), o);
    for (std::size_t k = 0; k < o.counts.size(); ++k) {
      const CompareCase* line = report.find(o.counts[k], RenderMode::Line);
      const CompareCase* point = report.find(o.counts[k], RenderMode::Point);
      ++cases;
      if (!line || !point || !line->coverage_error || !point->coverage_error ||
          *line->coverage_error > *point->coverage_error) {
        ++worse;
        continue;
      }
      incomplete += !line->completed + !point->completed;
      line_mean[k] += *line->coverage_error / 3.0;
    }
  }
  // Improvement with n, on average over the corpus: least-squares slope of
  // the corpus-mean line error against n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < options.counts.size(); ++k) {
    const double x = static_cast<double>(options.counts[k]);
    sx += x, sy += line_mean[k], sxx += x * x, sxy += x * line_mean[k];
  }
  const double m = static_cast<double>(options.counts.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const bool improves = slope < 0.0;
  const double wall = seconds_since(t0);
  return {worse == 0 && cases == 12 && improves && wall < 600.0,
          fmt("%d cases, line worse in %d, %d runs incomplete, mean line error %.2f/%.2f/%.2f/%.2f mm "
              "at n=30/40/50/60 (slope %.3f mm per robot), %.1f s wall",
              cases, worse, incomplete, line_mean[0], line_mean[1], line_mean[2], line_mean[3], slope, wall)};
}

// --- determinism -----------------------------------------------------------

Verdict determinism() {
  std::vector<Scenario> scenarios;
  for (const char* name : {"rectangle_drag", "cleanup", "keyframes"})
    scenarios.push_back(load_scenario(scenario_dir + "/" + std::string(name) + ".json"));
  Scenario noisy = scenarios.front();
  noisy.name += "_noisy";
  noisy.params.position_noise_sigma = 3.2;
  noisy.params.actuator_noise = true;
  noisy.params.seed = 99;
  scenarios.push_back(noisy);

  int differing = 0;
  for (const Scenario& s : scenarios) {
    const RunResult a = run_scenario(s);
    const RunResult b = run_scenario(s);
    const std::string ma = metrics_to_json(a.metrics, s).dump(2), mb = metrics_to_json(b.metrics, s).dump(2);
    if (a.log.str() != b.log.str() || ma != mb) ++differing;
  }
  return {differing == 0, fmt("%zu scenarios run twice, %d differ", scenarios.size(), differing)};
}

// --- tracking loss ---------------------------------------------------------

Verdict tracking_robustness() {
  const auto t0 = Clock::now();
  SimParams p;
  p.seed = 3;
  Scenario s;
  s.params = p;
  s.robots = make_robots(random_layout(10, p, 11), {Mount::Horizontal, Mount::Vertical});
  for (std::uint64_t f = 0; f < 3; ++f) {
    ExplicitTargets e;
    for (const Pose& g : random_layout(10, p, 100 + f)) e.entries.push_back({g, 120.0, Mount::Horizontal, 0.0});
    s.frames.push_back(e);
  }
  s.hold_time = 1.0;
  s.loop = true;
  Engine engine = make_engine(s);
  engine.step_ticks(static_cast<std::uint64_t>(std::llround(1e4 / p.dt_physics)));

  int spurious = 0, frames = 0;
  for (const EngineEvent& e : engine.event_log()) {
    if (e.kind == EngineEvent::Kind::Frame) ++frames;
    if (e.input && (e.input->kind == InputKind::PickUp || e.input->kind == InputKind::Move)) ++spurious;
  }
  return {spurious == 0 && engine.time() >= 1e4 - 1e-6 && p.tracking_loss_rate == 0.079 && p.max_dropout_ticks == 2,
          fmt("%.0f s simulated, %d formations, %d spurious PickUp/Move, %.1f s wall", engine.time(), frames,
              spurious, seconds_since(t0))};
}

// --- parser ----------------------------------------------------------------

Vec2 bezier_at(const std::vector<Vec2>& c, double t) {
  const double u = 1.0 - t;
  if (c.size() == 3) return c[0] * (u * u) + c[1] * (2 * u * t) + c[2] * (t * t);
  return c[0] * (u * u * u) + c[1] * (3 * u * u * t) + c[2] * (3 * u * t * t) + c[3] * (t * t * t);
}

Verdict parser_fidelity() {
  const auto curves = nlohmann::json::parse(slurp(data_dir + "/bezier_corpus.json"));
  const std::vector<Polyline> lines = parse_svg(slurp(data_dir + "/bezier_corpus.svg"));
  if (lines.size() != curves.size() || curves.size() != 20)
    return {false, fmt("expected 20 paths, parsed %zu", lines.size())};

  double worst = 0.0;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    std::vector<Vec2> dense;
    for (const auto& seg : curves[k]["segments"]) {
      std::vector<Vec2> c;
      for (const auto& p : seg["points"]) c.push_back({p[0].get<double>(), p[1].get<double>()});
      for (int i = 0; i <= 20000; ++i) dense.push_back(bezier_at(c, i / 20000.0));
    }
    if (curves[k]["closed"].get<bool>()) {
      const Vec2 a = dense.back(), b = dense.front();
      for (int i = 1; i < 1000; ++i) dense.push_back(a + (b - a) * (i / 1000.0));
    }
    // Curve to polyline, and polyline vertices and edge midpoints back to the curve.
    for (const Vec2& q : dense) worst = std::max(worst, lines[k].distance_to(q));
    for (std::size_t e = 0; e < lines[k].edge_count(); ++e) {
      const Segment s = lines[k].edge(e);
      for (const Vec2 q : {s.a, s.midpoint()}) {
        double best = INFINITY;
        for (const Vec2& d : dense) best = std::min(best, distance(q, d));
        worst = std::max(worst, best);
      }
    }
  }
  return {worst <= 1.0, fmt("20 paths, worst deviation %.4f mm", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--data") data_dir = argv[i + 1];
    else if (flag == "--scenarios") scenario_dir = argv[i + 1];
    else if (flag == "--only") only = argv[i + 1];
  }

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"assignment_optimality", assignment_optimality},
      {"collision_freedom", collision_freedom},
      {"threshold_semantics", threshold_semantics},
      {"actuator_timing", actuator_timing},
      {"emergent_accuracy", emergent_accuracy},
      {"rendering_comparison", rendering_comparison},
      {"determinism", determinism},
      {"tracking_robustness", tracking_robustness},
      {"parser_fidelity", parser_fidelity},
  };

  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && only != name) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
