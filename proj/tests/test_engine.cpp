#include <cmath>

#include "doctest.h"
#include "shapebots/engine.hpp"
#include "shapebots/error.hpp"
#include "shapebots/scenario.hpp"

using namespace shapebots;

namespace {

SimParams quiet() {
  SimParams p;
  p.tracking_loss_rate = 0;
  return p;
}

std::vector<RobotState> robots_at(const std::vector<Pose>& poses) {
  return make_robots(poses, {Mount::Horizontal, Mount::Vertical});
}

ExplicitTargets goals(const std::vector<Pose>& poses, double ext = 25, Mount mode = Mount::Vertical) {
  ExplicitTargets e;
  for (const Pose& p : poses) e.entries.push_back({p, ext, mode, 0});
  return e;
}

void run_until_settled(Engine& e, double limit = 60) {
  while (!e.settled() && e.time() < limit) e.step();
}

}  // namespace

TEST_CASE("empty world: only time advances") {
  Engine e(quiet(), {});
  e.step_ticks(100);
  CHECK(e.time() == doctest::Approx(1.0));
  CHECK(e.world().robots.empty());
  CHECK(e.event_log().empty());
  CHECK_FALSE(e.settled());
}

TEST_CASE("170 mm straight ahead takes about a second plus the loop delay") {
  Engine e(quiet(), robots_at({{200, 300, 0}}));
  e.set_shape(goals({{370, 300, 0}}));
  std::optional<double> arrived;
  e.on_arrival = [&](const RobotState&) { arrived = e.time(); };
  run_until_settled(e);
  REQUIRE(arrived);
  // 170 mm at 170 mm/s is 1.0 s, then the observation delay; both ends are
  // quantized to the 0.151 s loop.
  CHECK(*arrived >= 1.0 + 0.151 - 1e-9);
  CHECK(*arrived <= 1.0 + 0.151 + 2 * 0.151);
  const RobotState& r = e.world().robots[0];
  CHECK(distance(r.pose.position(), {370, 300}) < 10);
}

TEST_CASE("the controller acts on a frame one period old") {
  Engine e(quiet(), robots_at({{200, 300, 0}}));
  e.set_shape(goals({{600, 300, 0}}));
  // Control tick at t=0 captures; nothing is delivered until t=0.151.
  e.step();
  CHECK(e.world().robots[0].command.is_zero());
  CHECK_FALSE(e.belief(0));
  e.step_ticks(16);  // past the 0.151 control tick
  CHECK(e.belief(0));
  e.step_ticks(16);
  CHECK_FALSE(e.world().robots[0].command.is_zero());
}

TEST_CASE("head-on swap keeps its distance") {
  Engine e(quiet(), robots_at({{300, 370, 0}, {800, 370, 3.14159}}));
  // Goals chosen so the optimal assignment still crosses the pair's paths.
  e.set_shape(goals({{800, 372, 0}, {300, 368, 0}}));
  run_until_settled(e);
  CHECK(e.settled());
  CHECK(e.metrics().min_separation.value() > 50);
}

TEST_CASE("square in line mode converges within 5 mm coverage") {
  // Sides no longer than a full extension, so the bars can cover them.
  Scenario s;
  s.params = quiet();
  s.robots = robots_at(grid_layout(4, {150, 150}, {500, 300}, 120));
  s.frames.push_back(Rectangle{200, 200, {700, 400}});
  const RunResult r = run_scenario(s);
  CHECK(r.metrics.completed);
  CHECK(std::isfinite(r.metrics.makespan));
  REQUIRE(r.metrics.coverage_error);
  CHECK(*r.metrics.coverage_error <= 5.0);
  for (const RobotState& rb : r.final_world.robots) CHECK(rb.phase == BehaviorPhase::Holding);
}

TEST_CASE("same seed, same trajectory") {
  auto run = [] {
    SimParams p;
    p.position_noise_sigma = 3.2;
    p.actuator_noise = true;
    p.seed = 17;
    Engine e(p, robots_at(random_layout(6, p, 4)));
    e.set_shape(goals(random_layout(6, p, 5), 120, Mount::Horizontal));
    std::vector<Pose> trace;
    e.on_control_tick = [&](const WorldState& w) {
      for (const auto& r : w.robots) trace.push_back(r.pose);
    };
    run_until_settled(e);
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("robots stay inside the world") {
  SimParams p = quiet();
  Engine e(p, robots_at({{30, 30, -2.3}, {1120, 710, 0.7}}));
  e.set_shape(goals({{26, 700, 0}, {1124, 28, 0}}));
  e.on_control_tick = [&](const WorldState& w) {
    for (const auto& r : w.robots) {
      CHECK(r.pose.x >= p.body_radius - 1e-9);
      CHECK(r.pose.x <= p.world_width - p.body_radius + 1e-9);
      CHECK(r.pose.y >= p.body_radius - 1e-9);
      CHECK(r.pose.y <= p.world_height - p.body_radius + 1e-9);
    }
  };
  run_until_settled(e);
}

TEST_CASE("input events reach the log and the controller") {
  Engine e(quiet(), robots_at({{200, 200, 0}, {600, 400, 0}}));
  e.set_shape(goals({{300, 300, 0}, {700, 400, 0}}));
  run_until_settled(e);
  REQUIRE(e.settled());
  e.drain_events();

  e.drag_robot(0, {500, 600, 0});
  const int placed = e.place_robot({1000, 600, 0});
  CHECK(placed == 2);
  e.step_ticks(200);
  bool move = false, place = false;
  for (const EngineEvent& ev : e.drain_events()) {
    if (!ev.input) continue;
    move |= ev.input->kind == InputKind::Move && ev.robot_id == 0;
    place |= ev.input->kind == InputKind::Place && ev.robot_id == 2;
  }
  CHECK(move);
  CHECK(place);
  // The dragged robot goes back to a goal.
  run_until_settled(e);
  CHECK(e.settled());

  e.remove_robot(1);
  CHECK(e.world().find_robot(1) == nullptr);
  CHECK_THROWS_AS(e.remove_robot(1), InvalidArgument);
  CHECK_THROWS_AS(e.drag_robot(9, {}), InvalidArgument);
  CHECK_THROWS_AS(e.place_robot({-5, 0, 0}), InvalidArgument);
}

TEST_CASE("dragging a rectangle corner rescales the shape") {
  Engine e(quiet(), robots_at({{150, 150, 0}, {300, 150, 0}, {450, 150, 0}, {600, 150, 0}}));
  e.set_shape(Rectangle{200, 150, {575, 420}});
  run_until_settled(e);
  REQUIRE(e.settled());
  const Rectangle before = std::get<Rectangle>(*e.active_source());
  // The robot on the right edge, dragged 100 mm further out.
  int id = -1;
  for (const auto& r : e.world().robots)
    if (r.target && r.target->goal.x > 660) id = r.id;
  REQUIRE(id >= 0);
  e.drag_robot(id, {775, 420, deg_to_rad(90)});
  e.step_ticks(100);  // long enough for the tracker to notice
  run_until_settled(e, 120);
  const Rectangle after = std::get<Rectangle>(*e.active_source());
  CHECK(after.width > before.width * 1.5);
  CHECK(after.height / after.width == doctest::Approx(before.height / before.width));
}

TEST_CASE("tracking loss alone never looks like input") {
  SimParams p;  // 7.9% loss, dropouts of up to two frames
  Engine e(p, robots_at(random_layout(8, p, 2)));
  e.set_shape(goals(random_layout(8, p, 3)));
  e.step_ticks(60000);  // 600 s
  for (const EngineEvent& ev : e.event_log()) CHECK_FALSE(ev.input);
}

TEST_CASE("keyframes advance after the hold") {
  Engine e(quiet(), robots_at({{200, 200, 0}, {400, 200, 0}}));
  AnimationPlan plan = sequence_keyframes(
      std::vector<ShapeSpec>{goals({{300, 400, 0}, {600, 400, 0}}), goals({{300, 600, 0}, {600, 600, 0}})}, 2, 1.0);
  e.set_animation(plan);
  run_until_settled(e);
  CHECK(e.settled());
  CHECK(e.frame_index() == 1);
  int frames = 0;
  for (const auto& ev : e.event_log()) frames += ev.kind == EngineEvent::Kind::Frame;
  CHECK(frames == 1);
}

TEST_CASE("targets too close together are spread, with a warning") {
  Engine e(quiet(), robots_at({{200, 200, 0}, {400, 200, 0}}));
  e.set_shape(goals({{600, 400, 0}, {610, 400, 0}}));
  const TargetSet* t = e.active_targets();
  REQUIRE(t);
  CHECK(distance(t->entries[0].goal.position(), t->entries[1].goal.position()) >= 62 - 1e-6);
  bool warned = false;
  for (const auto& ev : e.event_log()) warned |= ev.kind == EngineEvent::Kind::Warning;
  CHECK(warned);
}

TEST_CASE("more targets than robots is refused without side effects") {
  Engine e(quiet(), robots_at({{200, 200, 0}}));
  CHECK_THROWS_AS(e.set_shape(Rectangle{100, 100, {500, 400}}), Infeasible);
  CHECK(e.active_targets() == nullptr);
}

TEST_CASE("params: validated now, applied at the next control tick") {
  Engine e(quiet(), robots_at({{200, 200, 0}}));
  SimParams p = e.params();
  p.v_max = 100;
  e.set_params(p);
  CHECK(e.params().v_max == 170);
  CHECK(e.requested_params().v_max == 100);
  e.step();
  CHECK(e.params().v_max == 100);
  p.dt_control = 0.2;
  CHECK_THROWS_AS(e.set_params(p), InvalidArgument);
  SimParams bad = e.params();
  bad.v_max = -1;
  CHECK_THROWS_AS(e.set_params(bad), InvalidArgument);
}

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(Engine(quiet(), robots_at({{10, 10, 0}})), InvalidArgument);
  auto twins = robots_at({{100, 100, 0}, {300, 100, 0}});
  twins[1].id = twins[0].id;
  CHECK_THROWS_AS(Engine(quiet(), twins), InvalidArgument);
}
