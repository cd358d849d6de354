#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "shapebots/actuator.hpp"
#include "shapebots/geometry.hpp"

namespace shapebots {

struct SimParams;

/// Wheel surface speeds, mm/s.
struct WheelCommand {
  double left = 0.0;
  double right = 0.0;

  bool is_zero() const noexcept { return left == 0.0 && right == 0.0; }
  bool operator==(const WheelCommand&) const = default;
};

/// Heading controller state.
struct PidState {
  double kp = 4.0;
  double ki = 0.0;
  double kd = 0.2;
  double integral_limit = 1.0;
  double integral = 0.0;
  double previous_error = 0.0;
  bool has_previous = false;

  void reset() noexcept {
    integral = 0.0;
    previous_error = 0.0;
    has_previous = false;
  }
};

PidState make_pid(const SimParams& params);

/// Control phase. The numeric order is the order of the cycle; Idle sits
/// outside it.
enum class BehaviorPhase { Idle = 0, Retracting = 1, Navigating = 2, Orienting = 3, Transforming = 4, Holding = 5 };

std::string_view to_string(BehaviorPhase p) noexcept;

/// Goal for one robot: where to stand, which way to face, what to extend.
struct TargetEntry {
  Pose goal;
  double extension = 25.0;
  Mount mode = Mount::Horizontal;
  double strip_delta = 0.0;  ///< Curved targets only

  bool operator==(const TargetEntry&) const = default;
};

struct RobotState {
  int id = 0;
  Pose pose;
  std::vector<ActuatorUnit> units;
  BehaviorPhase phase = BehaviorPhase::Idle;
  std::optional<TargetEntry> target;
  WheelCommand command;
  PidState pid;
  bool present = true;  ///< false while picked up off the table

  /// Index of the unit that renders the current target, or -1.
  int active_unit() const noexcept;
  /// Active unit length if any, else the longest unit, else 0.
  double display_extension() const noexcept;
};

/// Gives the robot a new goal: from any phase it starts over at Retracting.
void assign_target(RobotState& robot, const TargetEntry& target);
/// Drops the goal: the robot retracts in place and idles.
void clear_target(RobotState& robot);

Footprint footprint(const RobotState& robot, const SimParams& params);

}  // namespace shapebots
