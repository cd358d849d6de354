#pragma once

#include "shapebots/geometry.hpp"
#include "shapebots/robot.hpp"

namespace shapebots {

struct SimParams;

/// Velocity toward `goal` capped at v_max and at distance/dt_control, so the
/// robot never overshoots within one control period.
Vec2 preferred_velocity(Vec2 position, Vec2 goal, double v_max, double dt_control);

/// Converts body speeds to wheel speeds, rescaling both wheels by the same
/// factor when either would exceed `wheel_max`.
WheelCommand wheels_from_body(double v, double omega, double track_width, double wheel_max);

/// Heading PID toward the direction of `desired`; forward speed is
/// |desired| * max(0, cos(heading error)). A zero `desired` yields a zero
/// command and leaves the controller untouched.
WheelCommand track_velocity(Vec2 desired, const Pose& pose, PidState& pid, double dt, const SimParams& params);

/// Rotation-only command turning toward `heading`.
WheelCommand track_heading(double heading, const Pose& pose, PidState& pid, double dt, const SimParams& params);

/// Exact differential-drive integration over `dt` with constant wheel speeds.
Pose step_kinematics(const Pose& pose, const WheelCommand& cmd, double dt, double track_width);

struct BehaviorOutput {
  enum class Kind {
    Stop,     ///< wheels off
    Drive,    ///< follow `velocity`
    Rotate,   ///< turn in place to `heading`
    Retract,  ///< wheels off, all units to base
    Extend,   ///< wheels off, drive active unit to `extension`
  };
  BehaviorPhase phase = BehaviorPhase::Idle;
  Kind kind = Kind::Stop;
  Vec2 velocity;
  double heading = 0.0;
  double extension = 0.0;
};

/// One control-period decision of the behavior state machine. `robot.pose`
/// is the controller's estimate. Transitions cascade within a call, so a robot
/// already inside both thresholds goes straight from Navigating to
/// Transforming.
BehaviorOutput behavior_step(const RobotState& robot, const SimParams& params, double dt_control);

}  // namespace shapebots
