#include "shapebots/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shapebots/assignment.hpp"
#include "shapebots/error.hpp"
#include "shapebots/motion.hpp"
#include "shapebots/rvo.hpp"

namespace shapebots {

namespace {

constexpr double kTickEps = 1e-9;

double forward_speed(const WheelCommand& c) { return (c.left + c.right) / 2.0; }

Vec2 velocity_of(const Pose& p, const WheelCommand& c) { return unit_from_angle(p.theta) * forward_speed(c); }

WheelCommand scale_forward(const WheelCommand& c, double s) {
  const double v = forward_speed(c) * s;
  const double half_diff = (c.right - c.left) / 2.0;
  return {v - half_diff, v + half_diff};
}

std::vector<Vec2> trajectory(Pose p, const WheelCommand& c, std::uint64_t ticks, double dt, double track) {
  std::vector<Vec2> out;
  out.reserve(ticks + 1);
  out.push_back(p.position());
  for (std::uint64_t i = 0; i < ticks; ++i) {
    p = step_kinematics(p, c, dt, track);
    out.push_back(p.position());
  }
  return out;
}

// Worse-but-allowed test: a clearance below `need` is acceptable only if it
// does not shrink.
bool clearance_ok(double d, double d0, double need) { return d >= std::min(need, d0) - kTickEps; }

}  // namespace

std::string_view to_string(EngineEvent::Kind k) noexcept {
  switch (k) {
    case EngineEvent::Kind::Input: return "input";
    case EngineEvent::Kind::Warning: return "warning";
    case EngineEvent::Kind::Frame: return "frame";
  }
  return "?";
}

Engine::Engine(SimParams params, std::vector<RobotState> robots, std::vector<DiscObject> objects)
    : params_(params),
      rng_(params.seed),
      classifier_(params),
      min_separation_(std::numeric_limits<double>::infinity()) {
  params_.validate();
  std::sort(robots.begin(), robots.end(), [](const RobotState& a, const RobotState& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (i > 0 && robots[i].id == robots[i - 1].id) {
      throw InvalidArgument("duplicate robot id " + std::to_string(robots[i].id));
    }
    RobotState& r = robots[i];
    const double m = params_.body_radius;
    if (!(r.pose.x >= m && r.pose.x <= params_.world_width - m && r.pose.y >= m &&
          r.pose.y <= params_.world_height - m)) {
      throw InvalidArgument("robot " + std::to_string(r.id) + " starts outside the world");
    }
    r.pose = normalized_pose(r.pose);
    r.pid = make_pid(params_);
    r.present = true;
    controllers_[r.id] = {};
  }
  world_.robots = std::move(robots);
  world_.objects = std::move(objects);

  // The tracker already knows the robots on the table at start.
  ObservationFrame initial{0.0, {}};
  for (const RobotState& r : world_.robots) initial.robots.push_back({r.id, r.pose, true});
  classifier_.observe(initial, {});
}

void Engine::set_params(const SimParams& params) {
  params.validate();
  const SimParams& base = pending_params_ ? *pending_params_ : params_;
  if (params.dt_physics != base.dt_physics || params.dt_control != base.dt_control ||
      params.world_width != base.world_width || params.world_height != base.world_height ||
      params.seed != base.seed) {
    throw InvalidArgument("timing, world size and seed cannot change while running");
  }
  pending_params_ = params;
}

void Engine::set_shape(const ShapeSpec& spec) {
  TargetSet set = compile_shape(spec, world_.robots.size());
  if (set.entries.size() > world_.robots.size()) {
    throw Infeasible(std::to_string(set.entries.size()) + " targets for " + std::to_string(world_.robots.size()) +
                     " robots (short by " + std::to_string(set.entries.size() - world_.robots.size()) + ")");
  }
  AnimationPlan plan;
  plan.frames.push_back(std::move(set));
  plan.sources.push_back(spec);
  set_animation(std::move(plan));
}

// Goals closer than two bodies plus the arrival tolerance cannot all be held.
void Engine::make_reachable(TargetSet& set) const {
  const double gap = 2.0 * params_.body_radius + params_.safety_margin + params_.pos_threshold;
  separate_targets(set, gap, {params_.world_width, params_.world_height}, params_.body_radius);
}

void Engine::set_animation(AnimationPlan plan) {
  if (plan.frames.empty()) throw InvalidArgument("animation needs at least one frame");
  if (plan.sources.size() != plan.frames.size()) throw InvalidArgument("animation frames and sources differ");
  for (TargetSet& f : plan.frames) {
    make_reachable(f);
    for (const std::string& w : f.warnings) warn(w);
  }
  plan_ = std::move(plan);
  frame_ = 0;
  has_plan_ = true;
  redispatch_ = true;
  hold_start_.reset();
  settle_start_.reset();
}

const TargetSet* Engine::active_targets() const noexcept { return has_plan_ ? &plan_.frames[frame_] : nullptr; }

const ShapeSpec* Engine::active_source() const noexcept { return has_plan_ ? &plan_.sources[frame_] : nullptr; }

void Engine::drag_robot(int id, const Pose& pose) {
  RobotState* r = world_.find_robot(id);
  if (!r) throw InvalidArgument("no robot with id " + std::to_string(id));
  const double m = params_.body_radius;
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
    throw InvalidArgument("drag pose must be finite");
  }
  Pose p = normalized_pose(pose);
  p.x = std::clamp(p.x, m, params_.world_width - m);
  p.y = std::clamp(p.y, m, params_.world_height - m);
  r->pose = p;
}

int Engine::place_robot(const Pose& pose) {
  const double m = params_.body_radius;
  if (!(pose.x >= m && pose.x <= params_.world_width - m && pose.y >= m && pose.y <= params_.world_height - m) ||
      !std::isfinite(pose.theta)) {
    throw InvalidArgument("placed robot must be inside the world");
  }
  int id = 0;
  for (const RobotState& r : world_.robots) id = std::max(id, r.id + 1);
  RobotState r;
  r.id = id;
  r.pose = normalized_pose(pose);
  r.pid = make_pid(params_);
  if (!world_.robots.empty()) {
    // Same actuator kit as the rest of the swarm, fully retracted.
    for (ActuatorUnit u : world_.robots.front().units) r.units.push_back(ActuatorUnit{.mount = u.mount});
  }
  world_.robots.push_back(std::move(r));
  controllers_[id] = {};
  return id;
}

void Engine::remove_robot(int id) {
  auto it = std::find_if(world_.robots.begin(), world_.robots.end(), [&](const RobotState& r) { return r.id == id; });
  if (it == world_.robots.end()) throw InvalidArgument("no robot with id " + std::to_string(id));
  world_.robots.erase(it);
  controllers_.erase(id);
  dropout_left_.erase(id);
  cooled_.erase(id);
  driven_.erase(id);
}

std::optional<Pose> Engine::belief(int id) const {
  auto it = controllers_.find(id);
  if (it == controllers_.end()) return std::nullopt;
  return it->second.estimate;
}

bool Engine::control_due() const noexcept {
  return static_cast<double>(tick_) * params_.dt_physics + kTickEps >=
         static_cast<double>(control_index_) * params_.dt_control;
}

std::uint64_t Engine::ticks_until_next_control() const noexcept {
  // Called during control tick `control_index_`; the next one is +1.
  const double next = static_cast<double>(control_index_ + 1) * params_.dt_control;
  std::uint64_t k = tick_ + 1;
  while (static_cast<double>(k) * params_.dt_physics + kTickEps < next) ++k;
  return k - tick_;
}

void Engine::step() {
  if (control_due()) control_tick();
  physics();
  ++tick_;
  world_.time = static_cast<double>(tick_) * params_.dt_physics;
}

void Engine::step_ticks(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) step();
}

ObservationFrame Engine::capture() {
  ObservationFrame frame;
  frame.time = world_.time;
  const double axis_sigma = params_.position_noise_sigma * std::sqrt(2.0 / std::numbers::pi);
  for (const RobotState& r : world_.robots) {
    const auto id = static_cast<std::uint64_t>(r.id);
    bool present = true;
    int& left = dropout_left_[r.id];
    if (left > 0) {
      --left;
      present = false;
    } else if (params_.tracking_loss_rate > 0.0 && !cooled_.contains(r.id) &&
               rng_.uniform(CounterRng::stream(RngPurpose::TrackingLoss, id), control_index_) <
                   params_.tracking_loss_rate) {
      const auto len = 1 + rng_.bits(CounterRng::stream(RngPurpose::DropoutLength, id), control_index_) %
                               static_cast<std::uint64_t>(params_.max_dropout_ticks);
      left = static_cast<int>(len) - 1;
      cooled_.insert(r.id);
      present = false;
    }
    if (!present) {
      frame.robots.push_back({r.id, r.pose, false});
      continue;
    }
    cooled_.erase(r.id);
    Pose seen = r.pose;
    if (axis_sigma > 0.0) {
      const std::uint64_t s = CounterRng::stream(RngPurpose::PositionNoise, id);
      seen.x += axis_sigma * rng_.normal(s, 2 * control_index_);
      seen.y += axis_sigma * rng_.normal(s, 2 * control_index_ + 1);
    }
    frame.robots.push_back({r.id, seen, true});
  }
  return frame;
}

void Engine::control_tick() {
  if (pending_params_) {
    params_ = *pending_params_;
    pending_params_.reset();
    classifier_.configure(params_);
    for (RobotState& r : world_.robots) {
      const PidState fresh = make_pid(params_);
      r.pid.kp = fresh.kp;
      r.pid.ki = fresh.ki;
      r.pid.kd = fresh.kd;
      r.pid.integral_limit = fresh.integral_limit;
    }
  }

  Frame current{capture(), std::move(driven_)};
  driven_.clear();
  std::optional<Frame> delivered = std::move(in_flight_);
  in_flight_ = std::move(current);
  const std::uint64_t elapsed = tick_ - last_control_tick_;
  const std::uint64_t horizon = ticks_until_next_control();

  if (delivered) {
    // Belief: the delayed sighting (or the previous belief), carried forward
    // through the commands sent since it was taken.
    for (auto& [id, c] : controllers_) {
      std::optional<Pose> base = c.estimate;
      for (const Observation& o : delivered->observation.robots) {
        if (o.id == id && o.present) base = o.pose;
      }
      if (!base) continue;
      Pose est = *base;
      for (std::uint64_t i = 0; i < elapsed; ++i) {
        est = step_kinematics(est, c.last_command, params_.dt_physics, params_.track_width);
      }
      c.estimate = est;
    }
    for (const InputEvent& ev : classifier_.observe(delivered->observation, delivered->driven)) {
      EngineEvent e;
      e.kind = EngineEvent::Kind::Input;
      e.time = world_.time;
      e.robot_id = ev.robot_id;
      e.message = std::string(to_string(ev.kind));
      e.input = ev;
      events_.push_back(e);
      handle_input(ev);
    }
  }

  if (redispatch_) dispatch(force_);

  std::map<int, Pose> now;
  for (const auto& [id, c] : controllers_) {
    if (c.estimate) now[id] = *c.estimate;
  }
  collect_route_obstacles(now);
  std::map<int, WheelCommand> decided;
  for (RobotState& r : world_.robots) {
    if (!now.contains(r.id)) {
      r.command = {};
      controllers_[r.id].last_command = {};
      continue;
    }
    decide(r, now, decided, horizon);
  }

  update_progress();
  last_control_tick_ = tick_;
  ++control_index_;
  if (on_control_tick) on_control_tick(world_);
}

void Engine::handle_input(const InputEvent& ev) {
  switch (ev.kind) {
    case InputKind::Place:
    case InputKind::PickUp:
      redispatch_ = true;
      return;
    case InputKind::Move:
    case InputKind::Orient:
      break;
  }
  RobotState* r = world_.find_robot(ev.robot_id);
  if (!r || !r->target || !has_plan_) return;
  // A nudge that leaves the robot within its goal tolerance changes nothing;
  // tracking jitter lands here too.
  if (distance(ev.after.position(), r->target->goal.position()) < params_.pos_threshold &&
      std::fabs(angle_difference(r->target->goal.theta, ev.after.theta)) < params_.ang_threshold) {
    return;
  }

  const TargetSet& active = plan_.frames[frame_];
  std::size_t index = active.entries.size();
  for (std::size_t i = 0; i < active.entries.size(); ++i) {
    if (active.entries[i] == *r->target) index = i;
  }
  if (r->phase == BehaviorPhase::Holding && index < active.entries.size()) {
    std::optional<ShapeSpec> refit;
    const ShapeSpec& source = plan_.sources[frame_];
    if (const auto* wave = std::get_if<SineWave>(&source)) {
      if (index == 0 || index + 1 == active.entries.size()) {
        if (auto w = refit_sine(*wave, ev.after.x, index == 0)) refit = *w;
      }
    } else {
      refit = refit_on_drag(source, active, index, ev.after.position());
    }
    if (refit) {
      try {
        TargetSet set = compile_shape(*refit, world_.robots.size());
        make_reachable(set);
        for (const std::string& w : set.warnings) warn(w, r->id);
        plan_.frames[frame_] = std::move(set);
        plan_.sources[frame_] = *refit;
        redispatch_ = true;
        force_.insert(r->id);
        return;
      } catch (const Error& e) {
        warn(std::string("refit ignored: ") + e.what(), r->id);
      }
    }
  }
  // Not a reshaping gesture: send the robot back to its own goal.
  assign_target(*r, *r->target);
}

void Engine::dispatch(const std::set<int>& force) {
  if (!has_plan_) {
    redispatch_ = false;
    force_.clear();
    return;
  }
  std::vector<RobotState*> pool;
  for (RobotState& r : world_.robots) {
    if (!controllers_[r.id].estimate) return;  // wait until every robot has been seen
    pool.push_back(&r);
  }
  redispatch_ = false;
  force_.clear();
  hold_start_.reset();
  settle_start_.reset();
  const TargetSet& set = plan_.frames[frame_];
  world_.mode = set.mode;
  if (pool.empty()) return;

  std::vector<TargetEntry> entries = set.entries;
  if (entries.size() > pool.size()) {
    warn(std::to_string(entries.size() - pool.size()) + " targets left unfilled: not enough robots");
    entries.resize(pool.size());
  }
  std::vector<Pose> from;
  for (const RobotState* r : pool) from.push_back(*controllers_[r->id].estimate);
  std::vector<Pose> to;
  for (const TargetEntry& e : entries) to.push_back(e.goal);
  const Assignment a = solve_assignment(build_cost_matrix(from, to));

  std::vector<bool> used(pool.size(), false);
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const std::size_t i = a.robot_for_target[t];
    used[i] = true;
    RobotState& r = *pool[i];
    if (r.target && *r.target == entries[t] && !force.contains(r.id)) continue;
    assign_target(r, entries[t]);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!used[i] && pool[i]->target) clear_target(*pool[i]);
  }
}

void Engine::apply_extension(RobotState& robot, double extension) {
  const int active = robot.active_unit();
  if (active < 0) return;
  ActuatorUnit& u = robot.units[static_cast<std::size_t>(active)];
  if (u.commanded_length == extension) return;
  if (command_length(u, extension, actuator_limits(params_))) {
    warn("extension request clamped into the actuator range", robot.id);
  }
  if (u.mount == Mount::Curved && robot.target) u.strip_delta = robot.target->strip_delta;
}

void Engine::decide(RobotState& robot, std::map<int, Pose>& now, std::map<int, WheelCommand>& decided,
                    std::uint64_t horizon) {
  using Kind = BehaviorOutput::Kind;
  Controller& ctl = controllers_[robot.id];
  RobotState view = robot;
  view.pose = now.at(robot.id);
  // The real period is a whole number of physics ticks, close to dt_control.
  const double period = static_cast<double>(horizon) * params_.dt_physics;
  const BehaviorOutput out = behavior_step(view, params_, period);
  const BehaviorPhase before = robot.phase;
  robot.phase = out.phase;
  if (!robot.target) robot.phase = BehaviorPhase::Idle;

  WheelCommand cmd;
  switch (out.kind) {
    case Kind::Stop:
      break;
    case Kind::Retract: {
      const ActuatorLimits limits = actuator_limits(params_);
      for (ActuatorUnit& u : robot.units) {
        if (u.commanded_length != limits.min) command_length(u, limits.min, limits);
        if (u.mount == Mount::Curved) u.strip_delta = 0.0;
      }
      break;
    }
    case Kind::Extend:
      apply_extension(robot, out.extension);
      break;
    case Kind::Rotate:
      cmd = track_heading(out.heading, view.pose, robot.pid, params_.dt_control, params_);
      break;
    case Kind::Drive: {
      const Footprint own = shapebots::footprint(robot, params_);
      RvoAgent agent;
      agent.position = view.pose.position();
      agent.velocity = velocity_of(view.pose, ctl.last_command);
      agent.radius = own.body_radius + params_.safety_margin / 2.0;
      agent.max_speed = params_.v_max;
      std::vector<RvoNeighbor> neighbors;
      for (const RobotState& other : world_.robots) {
        if (other.id == robot.id || !now.contains(other.id)) continue;
        const Pose& p = now.at(other.id);
        if (distance(p.position(), agent.position) > params_.rvo_neighbor_dist) continue;
        const auto d = decided.find(other.id);
        const WheelCommand& oc = d != decided.end() ? d->second : controllers_[other.id].last_command;
        const bool reciprocal = other.phase == BehaviorPhase::Navigating;
        RvoNeighbor n;
        n.position = p.position();
        n.velocity = reciprocal ? velocity_of(p, oc) : Vec2{};
        n.radius = shapebots::footprint(other, params_).body_radius + params_.safety_margin / 2.0;
        n.reciprocal = reciprocal;
        neighbors.push_back(n);
      }
      for (const DiscObject& o : world_.objects) {
        if (o.pushable) continue;
        if (distance(o.center, agent.position) > params_.rvo_neighbor_dist + o.radius) continue;
        neighbors.push_back({o.center, {}, o.radius + params_.safety_margin / 2.0, false});
      }
      RvoOptions opt;
      opt.time_horizon = params_.rvo_time_horizon;
      opt.time_step = params_.dt_control;
      opt.wall_time = params_.dt_control;
      const double m = own.body_radius;
      opt.bounds = RvoBounds{{m, m}, {params_.world_width - m, params_.world_height - m}};
      const Vec2 preferred =
          out.phase == BehaviorPhase::Navigating ? detour(robot, ctl, view.pose, out.velocity) : out.velocity;
      const Vec2 v = resolve_velocity(agent, neighbors, preferred, opt);
      cmd = track_velocity(v, view.pose, robot.pid, params_.dt_control, params_);
      break;
    }
  }
  cmd = brake(robot, cmd, now, decided, horizon);
  robot.command = cmd;
  ctl.last_command = cmd;
  decided[robot.id] = cmd;

  if (robot.phase == BehaviorPhase::Holding && before != BehaviorPhase::Holding && on_arrival) on_arrival(robot);
}

namespace {
constexpr double kStallDistance = 20.0;  // headway that counts as progress, mm
constexpr double kStallTime = 2.0;       // s without headway before others route around
constexpr std::uint64_t kReplanEvery = 5;
constexpr double kRouteCell = 20.0;
}  // namespace

// Static obstacles for routing: parked robots (bodies and extended bars),
// fixed objects, and navigating robots that have stopped making headway.
void Engine::collect_route_obstacles(const std::map<int, Pose>& now) {
  route_obstacles_.clear();
  route_grid_.reset();
  parked_grid_.reset();
  const double own = params_.body_radius + params_.safety_margin;
  for (const RobotState& o : world_.robots) {
    Controller& c = controllers_[o.id];
    if (!now.contains(o.id)) continue;
    const Pose& p = now.at(o.id);
    bool obstacle = o.phase != BehaviorPhase::Navigating;
    if (o.phase == BehaviorPhase::Navigating) {
      if (!c.progress_pos || distance(*c.progress_pos, p.position()) > kStallDistance) {
        c.progress_pos = p.position();
        c.progress_time = world_.time;
      }
      obstacle = world_.time - c.progress_time > kStallTime;
    } else {
      c.progress_pos.reset();
    }
    if (!obstacle) continue;
    const bool stalled = o.phase == BehaviorPhase::Navigating;
    const Footprint fp = shapebots::footprint(p, o.units, params_);
    route_obstacles_.push_back({o.id, {fp.center, fp.center, fp.body_radius + own}, stalled});
    for (const Capsule& k : fp.capsules) route_obstacles_.push_back({o.id, {k.a, k.b, k.radius + own}, stalled});
  }
  for (const DiscObject& o : world_.objects) {
    if (!o.pushable) route_obstacles_.push_back({-1, {o.center, o.center, o.radius + own}, false});
  }
}

// ORCA alone stalls when parked robots wall off the goal; route around them.
Vec2 Engine::detour(const RobotState& robot, Controller& ctl, const Pose& pose, Vec2 preferred) {
  const Vec2 here = pose.position();
  const Vec2 goal = robot.target->goal.position();
  // Stuck while parked on someone else's goal: back off it first.
  if (ctl.progress_pos && world_.time - ctl.progress_time > kStallTime) {
    const double need = 2.0 * params_.body_radius + params_.safety_margin;
    for (const RobotState& o : world_.robots) {
      if (o.id == robot.id || !o.target || o.phase != BehaviorPhase::Navigating) continue;
      const Vec2 away = here - o.target->goal.position();
      if (norm(away) < need && norm(away) > 1e-9) return normalized(away) * params_.v_max;
    }
  }
  std::vector<Capsule> obstacles;
  std::vector<Capsule> parked;
  for (const RouteObstacle& o : route_obstacles_) {
    if (o.robot == robot.id) continue;
    obstacles.push_back(o.shape);
    if (!o.stalled) parked.push_back(o.shape);
  }
  const double own = params_.body_radius + params_.safety_margin;
  // The grid is too coarse for the last few centimeters.
  if (distance(here, goal) < 2.0 * own || path_clear(here, goal, obstacles)) {
    ctl.waypoint.reset();
    return preferred;
  }
  const bool reuse = ctl.waypoint && ctl.routed_goal == goal && control_index_ - ctl.routed_at < kReplanEvery &&
                     distance(here, *ctl.waypoint) > 2.0 * kRouteCell && path_clear(here, *ctl.waypoint, obstacles);
  if (!reuse) {
    auto grid = [&](std::optional<RouteGrid>& g, bool with_stalled) -> const RouteGrid& {
      if (!g) {
        g.emplace(Vec2{params_.world_width, params_.world_height}, kRouteCell, own);
        for (const RouteObstacle& o : route_obstacles_) {
          if (with_stalled || !o.stalled) g->block(o.shape);
        }
      }
      return *g;
    };
    ctl.waypoint = grid(route_grid_, true).waypoint(here, goal, obstacles, 2.0 * own);
    // Boxed in by a jam: plan as if the stalled robots were gone, which at
    // least leads out of dead ends.
    if (*ctl.waypoint == goal && !path_clear(here, goal, obstacles)) {
      ctl.waypoint = grid(parked_grid_, false).waypoint(here, goal, parked, 2.0 * own);
    }
    ctl.routed_goal = goal;
    ctl.routed_at = control_index_;
  }
  if (*ctl.waypoint == goal) return preferred;
  return normalized(*ctl.waypoint - here) * params_.v_max;
}

WheelCommand Engine::brake(const RobotState& robot, WheelCommand cmd, const std::map<int, Pose>& now,
                           const std::map<int, WheelCommand>& decided, std::uint64_t horizon) const {
  if (forward_speed(cmd) == 0.0) return cmd;
  const Pose start = now.at(robot.id);
  const double own_r = shapebots::footprint(robot, params_).body_radius;
  const double dt = params_.dt_physics;
  const double reach = 2.0 * params_.v_max * dt * static_cast<double>(horizon) + 2.0 * own_r + 200.0;

  struct Other {
    std::vector<Vec2> path;  // one point when static
    double need;
  };
  std::vector<Other> others;
  for (const RobotState& o : world_.robots) {
    if (o.id == robot.id || !now.contains(o.id)) continue;
    const Pose& p = now.at(o.id);
    if (distance(p.position(), start.position()) > reach) continue;
    const double need = own_r + shapebots::footprint(o, params_).body_radius + params_.safety_margin;
    const auto d = decided.find(o.id);
    if (d != decided.end() && forward_speed(d->second) != 0.0) {
      others.push_back({trajectory(p, d->second, horizon, dt, params_.track_width), need});
    } else {
      others.push_back({{p.position()}, need});
    }
  }
  for (const DiscObject& o : world_.objects) {
    if (o.pushable || distance(o.center, start.position()) > reach + o.radius) continue;
    others.push_back({{o.center}, own_r + o.radius + params_.safety_margin});
  }
  const double lo_x = own_r, hi_x = params_.world_width - own_r;
  const double lo_y = own_r, hi_y = params_.world_height - own_r;
  auto wall_gap = [&](Vec2 p) { return std::min({p.x - lo_x, hi_x - p.x, p.y - lo_y, hi_y - p.y}); };

  for (const double s : {1.0, 0.5, 0.25, 0.125}) {
    const WheelCommand cand = scale_forward(cmd, s);
    const std::vector<Vec2> path = trajectory(start, cand, horizon, dt, params_.track_width);
    bool ok = true;
    const double g0 = wall_gap(path.front());
    for (std::size_t k = 1; ok && k < path.size(); ++k) ok = clearance_ok(wall_gap(path[k]), g0, 0.0);
    for (const Other& o : others) {
      if (!ok) break;
      const double d0 = distance(path.front(), o.path.front());
      for (std::size_t k = 1; ok && k < path.size(); ++k) {
        const Vec2 q = o.path[std::min(k, o.path.size() - 1)];
        ok = clearance_ok(distance(path[k], q), d0, o.need);
      }
    }
    if (ok) return cand;
  }
  return scale_forward(cmd, 0.0);
}

void Engine::update_progress() {
  if (!has_plan_ || redispatch_) {
    hold_start_.reset();
    return;
  }
  bool any = false;
  bool all = true;
  for (const RobotState& r : world_.robots) {
    if (!r.target) continue;
    any = true;
    if (r.phase != BehaviorPhase::Holding) all = false;
  }
  if (!any || !all) {
    hold_start_.reset();
    return;
  }
  if (!hold_start_) hold_start_ = world_.time;
  const bool last = frame_ + 1 == plan_.frames.size();
  if (last && !plan_.loop && !settle_start_) settle_start_ = *hold_start_;
  if (world_.time - *hold_start_ + kTickEps < plan_.hold_time) return;
  if (last && !plan_.loop) return;
  frame_ = (frame_ + 1) % plan_.frames.size();
  EngineEvent e;
  e.kind = EngineEvent::Kind::Frame;
  e.time = world_.time;
  e.message = "frame " + std::to_string(frame_);
  events_.push_back(e);
  for (const std::string& w : plan_.frames[frame_].warnings) warn(w);
  redispatch_ = true;
  hold_start_.reset();
}

bool Engine::settled() const noexcept {
  if (!has_plan_ || plan_.loop || frame_ + 1 != plan_.frames.size() || !hold_start_ || redispatch_) return false;
  return world_.time - *hold_start_ + kTickEps >= plan_.hold_time;
}

ActuatorNoise Engine::noise_for(int robot, std::size_t unit) const {
  ActuatorNoise n;
  n.sigma_rate = params_.actuator_sigma_rate;
  n.enabled = params_.actuator_noise;
  n.seed = params_.seed;
  n.stream = CounterRng::stream(RngPurpose::ActuatorNoise, static_cast<std::uint64_t>(robot) * 16 + unit);
  return n;
}

void Engine::physics() {
  const double dt = params_.dt_physics;
  const ActuatorLimits limits = actuator_limits(params_);
  for (RobotState& r : world_.robots) {
    const Vec2 before = r.pose.position();
    if (!r.command.is_zero()) {
      r.pose = step_kinematics(r.pose, r.command, dt, params_.track_width);
      const double m = shapebots::footprint(r, params_).body_radius;
      r.pose.x = std::clamp(r.pose.x, std::min(m, before.x), std::max(params_.world_width - m, before.x));
      r.pose.y = std::clamp(r.pose.y, std::min(m, before.y), std::max(params_.world_height - m, before.y));
      driven_.insert(r.id);
      total_travel_ += distance(before, r.pose.position());
    }
    for (std::size_t i = 0; i < r.units.size(); ++i) {
      r.units[i] = step_actuator(r.units[i], dt, noise_for(r.id, i), limits);
    }
  }
  push_objects_now();
  for (std::size_t i = 0; i < world_.robots.size(); ++i) {
    for (std::size_t j = i + 1; j < world_.robots.size(); ++j) {
      min_separation_ =
          std::min(min_separation_, distance(world_.robots[i].pose.position(), world_.robots[j].pose.position()));
    }
  }
}

void Engine::push_objects_now() {
  const double left = push_objects(world_, params_);
  if (left > 1e-6) {
    if (!push_warned_) warn("pushed objects could not be fully separated");
    push_warned_ = true;
  } else {
    push_warned_ = false;
  }
}

void Engine::warn(std::string message, int robot) {
  EngineEvent e;
  e.kind = EngineEvent::Kind::Warning;
  e.time = world_.time;
  e.robot_id = robot;
  e.message = std::move(message);
  events_.push_back(std::move(e));
}

std::vector<EngineEvent> Engine::drain_events() {
  std::vector<EngineEvent> out(events_.begin() + static_cast<std::ptrdiff_t>(drained_), events_.end());
  drained_ = events_.size();
  return out;
}

Metrics Engine::metrics() const {
  Metrics m;
  m.completed = settled();
  m.sim_time = world_.time;
  m.makespan = settle_start_.value_or(world_.time);
  if (std::isfinite(min_separation_)) m.min_separation = min_separation_;
  m.total_travel = total_travel_;
  m.events = events_;
  if (const TargetSet* t = active_targets(); t && !t->reference.empty()) {
    try {
      m.coverage_error = coverage_error(world_, t->reference);
    } catch (const NotReady&) {
    }
  }
  return m;
}

}  // namespace shapebots
