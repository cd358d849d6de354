#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shapebots/params.hpp"
#include "shapebots/scenario.hpp"
#include "shapebots/world.hpp"

namespace shapebots {

struct CompareOptions {
  std::vector<std::size_t> counts{30, 40, 50, 60};
  std::vector<RenderMode> modes{RenderMode::Line, RenderMode::Point};
  std::uint64_t seed = 0;
  /// Contour length per robot at the largest count; sets the drawing scale.
  double perimeter_per_robot = 95.0;
  double time_limit = 300.0;
  unsigned threads = 0;  ///< 0: hardware concurrency
  /// Where final-frame images go; nothing is written when empty.
  std::filesystem::path image_dir;
  std::string label = "shape";
  SimParams params;  ///< world size is replaced by the fitted one
};

struct CompareCase {
  std::size_t n = 0;
  RenderMode mode = RenderMode::Line;
  bool completed = false;
  std::optional<double> coverage_error;
  double makespan = 0.0;
  std::optional<double> min_separation;
  std::filesystem::path image;
};

struct CompareReport {
  std::string label;
  double world_width = 0.0;
  double world_height = 0.0;
  std::vector<CompareCase> cases;

  const CompareCase* find(std::size_t n, RenderMode mode) const;
  /// Line mode is no worse than point mode at every count that ran both.
  bool line_not_worse() const;
  nlohmann::json to_json() const;
  std::string table() const;
};

/// Scenario the comparison runs for one (n, mode): contours scaled to the
/// target perimeter, a world fitted around them and the robots on a grid
/// below the drawing.
Scenario comparison_scenario(const std::vector<Polyline>& contours, std::size_t n, RenderMode mode,
                             const CompareOptions& options);

/// Runs every (count, mode) pair, in parallel.
CompareReport compare(const std::vector<Polyline>& contours, const CompareOptions& options);

}  // namespace shapebots
