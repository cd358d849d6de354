#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shapebots/interaction.hpp"
#include "shapebots/params.hpp"
#include "shapebots/rng.hpp"
#include "shapebots/route.hpp"
#include "shapebots/shape_compiler.hpp"
#include "shapebots/world.hpp"

namespace shapebots {

struct EngineEvent {
  enum class Kind { Input, Warning, Frame };
  Kind kind = Kind::Warning;
  double time = 0.0;
  int robot_id = -1;
  std::string message;
  std::optional<InputEvent> input;
};

std::string_view to_string(EngineEvent::Kind k) noexcept;

struct Metrics {
  bool completed = false;
  double makespan = 0.0;        ///< time the final formation was first all Holding
  std::optional<double> min_separation;  ///< closest approach of two robot centers, mm
  std::optional<double> coverage_error;
  double total_travel = 0.0;
  double sim_time = 0.0;
  std::vector<EngineEvent> events;
};

/// Deterministic world stepped in fixed physics ticks. Every control period
/// the tracker captures the true state and the controller acts on the frame
/// captured one period earlier.
class Engine {
 public:
  Engine(SimParams params, std::vector<RobotState> robots, std::vector<DiscObject> objects = {});

  const WorldState& world() const noexcept { return world_; }
  const SimParams& params() const noexcept { return params_; }
  /// Params as they will be after the next control tick.
  const SimParams& requested_params() const noexcept { return pending_params_ ? *pending_params_ : params_; }
  std::uint64_t tick() const noexcept { return tick_; }
  double time() const noexcept { return world_.time; }

  /// Validated now, applied at the next control tick. Timing, world size and
  /// seed are fixed once the engine exists.
  void set_params(const SimParams& params);

  /// Compiles and dispatches one shape. Throws on compile errors without
  /// changing anything.
  void set_shape(const ShapeSpec& spec);
  void set_animation(AnimationPlan plan);
  const TargetSet* active_targets() const noexcept;
  const ShapeSpec* active_source() const noexcept;
  std::size_t frame_index() const noexcept { return frame_; }

  /// Physically moves a robot, as a hand would. The controller only learns
  /// of it through the tracker.
  void drag_robot(int id, const Pose& pose);
  /// Puts a new robot on the table; returns its id.
  int place_robot(const Pose& pose);
  void remove_robot(int id);

  /// One physics tick.
  void step();
  /// Steps until the control tick after the next, or for `ticks` ticks.
  void step_ticks(std::uint64_t ticks);

  /// Final frame reached and held for the hold time by every targeted robot.
  bool settled() const noexcept;
  std::optional<double> settle_time() const noexcept { return settle_start_; }

  /// Events since the last drain; the full history stays in the log.
  std::vector<EngineEvent> drain_events();
  const std::vector<EngineEvent>& event_log() const noexcept { return events_; }

  Metrics metrics() const;

  /// The controller's current belief of a robot's pose, if it has one.
  std::optional<Pose> belief(int id) const;

  /// Called after every control tick with the world state.
  std::function<void(const WorldState&)> on_control_tick;
  /// Called whenever a robot enters Holding, with its true pose then.
  std::function<void(const RobotState&)> on_arrival;

 private:
  struct Controller {
    std::optional<Pose> estimate;  ///< belief at the last control tick
    WheelCommand last_command;
    std::optional<Vec2> waypoint;  ///< detour around static robots, if any
    Vec2 routed_goal;
    std::uint64_t routed_at = 0;
    std::optional<Vec2> progress_pos;  ///< where the robot last made headway
    double progress_time = 0.0;
  };
  struct Frame {
    ObservationFrame observation;
    std::set<int> driven;
  };

  bool control_due() const noexcept;
  std::uint64_t ticks_until_next_control() const noexcept;
  ObservationFrame capture();
  void control_tick();
  void handle_input(const InputEvent& ev);
  void make_reachable(TargetSet& set) const;
  void dispatch(const std::set<int>& force = {});
  void decide(RobotState& robot, std::map<int, Pose>& now, std::map<int, WheelCommand>& decided,
              std::uint64_t horizon);
  void collect_route_obstacles(const std::map<int, Pose>& now);
  Vec2 detour(const RobotState& robot, Controller& ctl, const Pose& pose, Vec2 preferred);
  WheelCommand brake(const RobotState& robot, WheelCommand cmd, const std::map<int, Pose>& now,
                     const std::map<int, WheelCommand>& decided, std::uint64_t horizon) const;
  void apply_extension(RobotState& robot, double extension);
  void physics();
  void push_objects_now();
  void update_progress();
  void warn(std::string message, int robot = -1);
  ActuatorNoise noise_for(int robot, std::size_t unit) const;

  SimParams params_;
  std::optional<SimParams> pending_params_;
  WorldState world_;
  CounterRng rng_;
  std::uint64_t tick_ = 0;
  std::uint64_t control_index_ = 0;
  std::uint64_t last_control_tick_ = 0;

  std::map<int, Controller> controllers_;
  std::map<int, int> dropout_left_;  ///< remaining absent frames per robot
  std::set<int> cooled_;             ///< robots that must be seen before dropping again
  std::set<int> driven_;             ///< nonzero wheel command since the last capture
  std::optional<Frame> in_flight_;   ///< captured, not yet delivered
  InputClassifier classifier_;

  AnimationPlan plan_;
  std::size_t frame_ = 0;
  bool has_plan_ = false;
  bool redispatch_ = false;
  std::set<int> force_;  ///< robots sent back to their goal even if it is unchanged
  struct RouteObstacle {
    int robot;  ///< -1 for objects
    Capsule shape;
    bool stalled;  ///< a navigating robot that stopped making headway
  };
  std::vector<RouteObstacle> route_obstacles_;  ///< this control tick's
  std::optional<RouteGrid> route_grid_;         ///< built on first use each tick
  std::optional<RouteGrid> parked_grid_;        ///< same without stalled robots
  std::optional<double> hold_start_;
  std::optional<double> settle_start_;
  bool push_warned_ = false;

  double min_separation_;
  double total_travel_ = 0.0;
  std::vector<EngineEvent> events_;
  std::size_t drained_ = 0;
};

/// Resolves penetration of pushable discs by robot bodies and extended
/// capsules, then by walls and each other. Returns the largest penetration
/// left over (0 when fully resolved).
double push_objects(WorldState& world, const SimParams& params);

}  // namespace shapebots
