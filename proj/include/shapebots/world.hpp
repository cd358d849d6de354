#pragma once

#include <vector>

#include "shapebots/robot.hpp"

namespace shapebots {

enum class RenderMode { Line, Point };

std::string_view to_string(RenderMode m) noexcept;

/// Disc on the table: debris the robots can push, or a fixed object (a cup).
struct DiscObject {
  int id = 0;
  Vec2 center;
  double radius = 10.0;
  bool pushable = true;
};

struct WorldState {
  double time = 0.0;
  std::vector<RobotState> robots;
  std::vector<DiscObject> objects;
  RenderMode mode = RenderMode::Line;

  RobotState* find_robot(int id) noexcept;
  const RobotState* find_robot(int id) const noexcept;
};

}  // namespace shapebots
