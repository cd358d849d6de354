#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "shapebots/world.hpp"

namespace shapebots {

/// One robot at one instant. `mount` names the unit on display ("none" when
/// the robot has no actuators).
struct TrajectoryRecord {
  double time = 0.0;
  int id = 0;
  Pose pose;
  std::string mount = "none";
  double extension = 25.0;
  BehaviorPhase phase = BehaviorPhase::Idle;

  bool operator==(const TrajectoryRecord&) const = default;
};

/// Plain-text trajectory log, one record per line:
///
///     # shapebots-trajectory v1
///     # time id x y theta mount extension phase
///     0.160000 0 100.000000 200.000000 0.000000 horizontal 25.000000 Navigating
///
/// Fields are space separated, numbers in fixed notation with six decimals,
/// angles in radians. Lines starting with '#' are comments.
class TrajectoryLog {
 public:
  static constexpr std::string_view kMagic = "# shapebots-trajectory v1";

  void record(const WorldState& world);
  void add(TrajectoryRecord r) { records_.push_back(std::move(r)); }

  const std::vector<TrajectoryRecord>& records() const noexcept { return records_; }
  /// Records of the last instant in the log.
  std::vector<TrajectoryRecord> last_frame() const;

  void write(std::ostream& out) const;
  std::string str() const;
  /// Throws ParseError with the byte offset of the offending line.
  static TrajectoryLog parse(std::string_view text);

 private:
  std::vector<TrajectoryRecord> records_;
};

BehaviorPhase phase_from_string(std::string_view name);

}  // namespace shapebots
