#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "shapebots/geometry.hpp"

namespace shapebots {

struct SimParams;

enum class Mount { Horizontal, Vertical, Curved, Volumetric, Areal };

std::string_view to_string(Mount m) noexcept;
/// Throws InvalidArgument on an unknown name.
Mount mount_from_string(std::string_view name);

/// Open-loop reel actuator. `length` is the true length; `internal_estimate`
/// is what the robot believes from motor run time.
struct ActuatorUnit {
  Mount mount = Mount::Horizontal;
  double length = 25.0;
  double commanded_length = 25.0;
  double internal_estimate = 25.0;
  double strip_delta = 0.0;  ///< Curved only: L1 - L2

  // Motion bookkeeping: each new command draws one rate multiplier.
  std::uint64_t motions = 0;
  double motion_target = 25.0;
  double rate_scale = 1.0;
};

struct ActuatorLimits {
  double rate = 33.0;  ///< mm/s
  double min = 25.0;
  double max = 200.0;
};

ActuatorLimits actuator_limits(const SimParams& params);

struct ActuatorNoise {
  double sigma_rate = 0.0;  ///< std-dev of the rate multiplier
  bool enabled = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Sets the commanded length, clamped into range. Returns true when clamping
/// changed the request.
bool command_length(ActuatorUnit& unit, double length, const ActuatorLimits& limits);

/// Advances one time step. The estimate moves at the nominal rate; the true
/// length at the nominal rate times (1 + eps), eps drawn once per command.
/// Retracting to the minimum runs until the limit switch fires.
ActuatorUnit step_actuator(ActuatorUnit unit, double dt, const ActuatorNoise& noise, const ActuatorLimits& limits);

/// When the true length has reached the minimum, snaps length and estimate to
/// exactly the minimum. Otherwise returns the unit unchanged.
ActuatorUnit trigger_limit_switch(ActuatorUnit unit, const ActuatorLimits& limits);

/// True when fully retracted and recalibrated.
bool at_base(const ActuatorUnit& unit, const ActuatorLimits& limits) noexcept;
/// True when the current command has been carried out (by the estimate).
bool motion_complete(const ActuatorUnit& unit, const ActuatorLimits& limits) noexcept;

/// Arc of a two-strip curved actuator, in the robot frame: midpoint at the
/// origin, tangent along +x, bending left for positive sweep.
struct Arc {
  Vec2 center;
  double radius = 0.0;
  double start_angle = 0.0;
  double sweep = 0.0;  ///< signed, radians

  Vec2 point(double fraction) const noexcept {
    return center + unit_from_angle(start_angle + sweep * fraction) * radius;
  }
};

using CurvedShape = std::variant<Segment, Arc>;

/// Concentric-arc model of two strips of lengths base +/- delta/2 spaced
/// `width` apart. Throws InvalidArgument when |delta| >= 2*base or a strip
/// would leave [25, 200].
CurvedShape curved_geometry(double base_length, double strip_delta, double width);

struct Capsule {
  Vec2 a;
  Vec2 b;
  double radius = 0.0;
};

/// Planar collision geometry of one robot.
struct Footprint {
  Vec2 center;
  double body_radius = 0.0;
  std::vector<Capsule> capsules;
  double height = 0.0;  ///< tallest vertical extension, metadata only
};

Footprint footprint(const Pose& pose, std::span<const ActuatorUnit> units, const SimParams& params);

/// Distance from `p` to the footprint surface (negative inside).
double signed_distance(const Footprint& fp, Vec2 p) noexcept;

}  // namespace shapebots
