#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shapebots/geometry.hpp"

namespace shapebots {

/// Robot-by-target matrix of non-negative, finite costs (mm).
class CostMatrix {
 public:
  CostMatrix(std::size_t n_robots, std::size_t n_targets, std::vector<double> row_major);

  std::size_t n_robots() const noexcept { return n_robots_; }
  std::size_t n_targets() const noexcept { return n_targets_; }
  double operator()(std::size_t robot, std::size_t target) const noexcept {
    return cost_[robot * n_targets_ + target];
  }

 private:
  std::size_t n_robots_;
  std::size_t n_targets_;
  std::vector<double> cost_;
};

struct Assignment {
  std::vector<std::size_t> robot_for_target;  ///< index = target, value = robot
  double total_cost = 0.0;
  std::vector<std::size_t> unassigned_robots;  ///< ascending
};

/// Euclidean distance between positions; headings are ignored.
CostMatrix build_cost_matrix(std::span<const Pose> robots, std::span<const Pose> targets);

/// Minimum-cost injective target -> robot mapping (Munkres). Among optimal
/// mappings the lexicographically smallest robot_for_target vector wins.
/// Throws Infeasible when there are more targets than robots.
Assignment solve_assignment(const CostMatrix& matrix);

}  // namespace shapebots
