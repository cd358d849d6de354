#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "shapebots/geometry.hpp"
#include "shapebots/shape_compiler.hpp"

namespace shapebots {

struct SimParams;

enum class InputKind { Place, Move, Orient, PickUp };

std::string_view to_string(InputKind k) noexcept;

struct InputEvent {
  InputKind kind = InputKind::Move;
  int robot_id = 0;
  Pose before;
  Pose after;
  double time = 0.0;

  bool operator==(const InputEvent&) const = default;
};

/// One robot as seen by the tracker. Robots missing from a frame count as
/// absent, the same as present == false.
struct Observation {
  int id = 0;
  Pose pose;
  bool present = true;
};

struct ObservationFrame {
  double time = 0.0;
  std::vector<Observation> robots;
};

/// Turns the tracker stream into user-input events, one frame per control
/// period, in time order.
///
/// A robot's reference pose is the mean of its observations since it last
/// stopped being driven or last produced an event, which keeps the
/// thresholds clear of tracking jitter. A displacement has to show in two
/// consecutive sightings, and in their mean, before it becomes a Move or
/// Orient.
class InputClassifier {
 public:
  explicit InputClassifier(const SimParams& params);

  /// `driven` holds the robots that received a nonzero wheel command since
  /// the previous frame.
  std::vector<InputEvent> observe(const ObservationFrame& frame, const std::set<int>& driven);

  void configure(const SimParams& params);

  /// Forgets a robot entirely (removed from the world).
  void forget(int id);

 private:
  struct Track {
    Vec2 sum;
    Vec2 heading_sum;
    int samples = 0;
    Pose last;
    double last_seen = 0.0;
    bool picked_up = false;
    bool driven = false;
    int pending = 0;  ///< consecutive displaced sightings
    Pose first_displaced;
  };
  Pose reference(const Track& t) const;
  void reset_reference(Track& t, const Pose& pose) const;

  double move_threshold_;
  double orient_threshold_;
  double absence_timeout_;
  std::map<int, Track> tracks_;
};

/// Batch form: runs a fresh classifier over `frames`; `driven[i]` belongs to
/// frame i.
std::vector<InputEvent> classify_input(std::span<const ObservationFrame> frames,
                                       std::span<const std::set<int>> driven, const SimParams& params);

/// Rescales a Rectangle or DrawnLines shape about the centroid of the goals
/// that were not moved, by the ratio of the moved goal's new to old distance
/// from that centroid. Returns nullopt for other shapes, fewer than two
/// entries, or a degenerate drag (either distance under 1 mm).
std::optional<ShapeSpec> refit_on_drag(const ShapeSpec& shape, const TargetSet& active, std::size_t moved_target,
                                       Vec2 new_position);

/// Keeps one end of the wave fixed and moves the other to `moved_x`. The
/// wavelength becomes the new span; amplitude and count are unchanged.
/// Returns nullopt when the span would not be positive.
std::optional<SineWave> refit_sine(const SineWave& wave, double moved_x, bool moved_first = false);

}  // namespace shapebots
