#include "shapebots/motion.hpp"

#include <algorithm>
#include <cmath>

#include "shapebots/error.hpp"
#include "shapebots/params.hpp"

namespace shapebots {

Vec2 preferred_velocity(Vec2 position, Vec2 goal, double v_max, double dt_control) {
  const Vec2 to_goal = goal - position;
  const double d = norm(to_goal);
  if (d == 0.0) return {};
  const double speed = std::min(v_max, d / dt_control);
  return to_goal * (speed / d);
}

WheelCommand wheels_from_body(double v, double omega, double track_width, double wheel_max) {
  WheelCommand cmd{v - omega * track_width / 2.0, v + omega * track_width / 2.0};
  const double peak = std::max(std::fabs(cmd.left), std::fabs(cmd.right));
  if (peak > wheel_max) {
    const double s = wheel_max / peak;
    cmd.left *= s;
    cmd.right *= s;
  }
  return cmd;
}

namespace {

double pid_update(PidState& pid, double error, double dt) {
  pid.integral = std::clamp(pid.integral + error * dt, -pid.integral_limit, pid.integral_limit);
  const double derivative = pid.has_previous ? angle_difference(error, pid.previous_error) / dt : 0.0;
  pid.previous_error = error;
  pid.has_previous = true;
  return pid.kp * error + pid.ki * pid.integral + pid.kd * derivative;
}

}  // namespace

WheelCommand track_velocity(Vec2 desired, const Pose& pose, PidState& pid, double dt, const SimParams& params) {
  if (!(dt > 0.0)) throw InvalidArgument("track_velocity: dt must be > 0");
  const double speed = norm(desired);
  if (speed == 0.0) return {};
  const double error = angle_difference(heading_of(desired), pose.theta);
  const double omega = pid_update(pid, error, dt);
  const double forward = speed * std::max(0.0, std::cos(error));
  return wheels_from_body(forward, omega, params.track_width, params.v_max);
}

WheelCommand track_heading(double heading, const Pose& pose, PidState& pid, double dt, const SimParams& params) {
  if (!(dt > 0.0)) throw InvalidArgument("track_heading: dt must be > 0");
  const double error = angle_difference(heading, pose.theta);
  return wheels_from_body(0.0, pid_update(pid, error, dt), params.track_width, params.v_max);
}

Pose step_kinematics(const Pose& pose, const WheelCommand& cmd, double dt, double track_width) {
  if (!(dt > 0.0)) throw InvalidArgument("step_kinematics: dt must be > 0");
  const double v = (cmd.left + cmd.right) / 2.0;
  const double omega = (cmd.right - cmd.left) / track_width;
  Pose next = pose;
  if (std::fabs(omega) < 1e-9) {
    next.x += v * dt * std::cos(pose.theta);
    next.y += v * dt * std::sin(pose.theta);
    next.theta = wrap_angle(pose.theta + omega * dt);
    return next;
  }
  const double theta1 = pose.theta + omega * dt;
  const double r = v / omega;
  next.x += r * (std::sin(theta1) - std::sin(pose.theta));
  next.y -= r * (std::cos(theta1) - std::cos(pose.theta));
  next.theta = wrap_angle(theta1);
  return next;
}

BehaviorOutput behavior_step(const RobotState& robot, const SimParams& params, double dt_control) {
  using Kind = BehaviorOutput::Kind;
  BehaviorOutput out;
  out.phase = robot.phase;
  const ActuatorLimits limits = actuator_limits(params);

  if (!robot.target) {
    out.phase = BehaviorPhase::Idle;
    out.kind = Kind::Retract;
    return out;
  }
  const TargetEntry& target = *robot.target;
  const Vec2 goal = target.goal.position();
  const double position_error = distance(robot.pose.position(), goal);
  const double heading_error = std::fabs(angle_difference(target.goal.theta, robot.pose.theta));

  // Inside the last two periods of travel, face the goal before driving so
  // the final stretch is straight instead of an arc.
  auto approach = [&](BehaviorOutput& o) {
    const Vec2 to_goal = goal - robot.pose.position();
    if (position_error < 2.0 * params.v_max * dt_control &&
        std::fabs(angle_difference(heading_of(to_goal), robot.pose.theta)) > params.ang_threshold) {
      o.kind = Kind::Rotate;
      o.heading = heading_of(to_goal);
      return;
    }
    o.kind = Kind::Drive;
    o.velocity = preferred_velocity(robot.pose.position(), goal, params.v_max, dt_control);
    if (position_error < 2.0 * params.v_max * dt_control) {
      // Split the rest into equal full periods rather than stopping short.
      const double periods = std::ceil(position_error / (params.v_max * dt_control) - 1e-9);
      o.velocity = to_goal * (1.0 / (std::max(1.0, periods) * dt_control));
    }
  };

  // Each phase either emits an output or falls through to the next one.
  for (;;) {
    switch (out.phase) {
      case BehaviorPhase::Idle:
        out.phase = BehaviorPhase::Retracting;
        continue;
      case BehaviorPhase::Retracting: {
        const bool retracted = std::all_of(robot.units.begin(), robot.units.end(),
                                           [&](const ActuatorUnit& u) { return at_base(u, limits); });
        if (retracted) {
          out.phase = BehaviorPhase::Navigating;
          continue;
        }
        out.kind = Kind::Retract;
        return out;
      }
      case BehaviorPhase::Navigating:
        if (position_error < params.pos_threshold) {
          out.phase = BehaviorPhase::Orienting;
          continue;
        }
        approach(out);
        return out;
      case BehaviorPhase::Orienting:
        if (position_error >= params.pos_threshold) {
          // Knocked off the goal while turning: re-approach without leaving the phase.
          approach(out);
          return out;
        }
        if (heading_error < params.ang_threshold) {
          out.phase = BehaviorPhase::Transforming;
          continue;
        }
        out.kind = Kind::Rotate;
        out.heading = target.goal.theta;
        return out;
      case BehaviorPhase::Transforming: {
        const int active = robot.active_unit();
        const double wanted = std::clamp(target.extension, limits.min, limits.max);
        if (active < 0) {
          out.phase = BehaviorPhase::Holding;
          continue;
        }
        const ActuatorUnit& unit = robot.units[static_cast<std::size_t>(active)];
        if (unit.commanded_length == wanted && motion_complete(unit, limits)) {
          out.phase = BehaviorPhase::Holding;
          continue;
        }
        out.kind = Kind::Extend;
        out.extension = wanted;
        return out;
      }
      case BehaviorPhase::Holding:
        out.kind = Kind::Stop;
        return out;
    }
  }
}

}  // namespace shapebots
