#include "shapebots/robot.hpp"

#include <algorithm>

#include "shapebots/params.hpp"

namespace shapebots {

PidState make_pid(const SimParams& params) {
  PidState pid;
  pid.kp = params.kp;
  pid.ki = params.ki;
  pid.kd = params.kd;
  pid.integral_limit = params.integral_limit;
  return pid;
}

std::string_view to_string(BehaviorPhase p) noexcept {
  switch (p) {
    case BehaviorPhase::Idle: return "Idle";
    case BehaviorPhase::Retracting: return "Retracting";
    case BehaviorPhase::Navigating: return "Navigating";
    case BehaviorPhase::Orienting: return "Orienting";
    case BehaviorPhase::Transforming: return "Transforming";
    case BehaviorPhase::Holding: return "Holding";
  }
  return "Idle";
}

int RobotState::active_unit() const noexcept {
  if (!target) return -1;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].mount == target->mode) return static_cast<int>(i);
  }
  return -1;
}

double RobotState::display_extension() const noexcept {
  const int active = active_unit();
  if (active >= 0) return units[static_cast<std::size_t>(active)].length;
  double best = 0.0;
  for (const ActuatorUnit& u : units) best = std::max(best, u.length);
  return best;
}

void assign_target(RobotState& robot, const TargetEntry& target) {
  robot.target = target;
  robot.phase = BehaviorPhase::Retracting;
  robot.command = {};
  robot.pid.reset();
}

void clear_target(RobotState& robot) {
  robot.target.reset();
  robot.phase = BehaviorPhase::Idle;
  robot.command = {};
  robot.pid.reset();
}

Footprint footprint(const RobotState& robot, const SimParams& params) {
  return footprint(robot.pose, robot.units, params);
}

}  // namespace shapebots
