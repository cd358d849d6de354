#include "shapebots/actuator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shapebots/error.hpp"
#include "shapebots/params.hpp"
#include "shapebots/rng.hpp"

namespace shapebots {

std::string_view to_string(Mount m) noexcept {
  switch (m) {
    case Mount::Horizontal: return "horizontal";
    case Mount::Vertical: return "vertical";
    case Mount::Curved: return "curved";
    case Mount::Volumetric: return "volumetric";
    case Mount::Areal: return "areal";
  }
  return "horizontal";
}

Mount mount_from_string(std::string_view name) {
  for (Mount m : {Mount::Horizontal, Mount::Vertical, Mount::Curved, Mount::Volumetric, Mount::Areal}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown actuator mount '" + std::string(name) + "'");
}

ActuatorLimits actuator_limits(const SimParams& params) {
  return {params.actuator_rate, params.actuator_min, params.actuator_max};
}

bool command_length(ActuatorUnit& unit, double length, const ActuatorLimits& limits) {
  const double clamped = std::clamp(length, limits.min, limits.max);
  unit.commanded_length = clamped;
  return clamped != length;
}

ActuatorUnit trigger_limit_switch(ActuatorUnit unit, const ActuatorLimits& limits) {
  if (unit.length <= limits.min) {
    unit.length = limits.min;
    unit.internal_estimate = limits.min;
  }
  return unit;
}

bool at_base(const ActuatorUnit& unit, const ActuatorLimits& limits) noexcept {
  return unit.length == limits.min && unit.internal_estimate == limits.min;
}

bool motion_complete(const ActuatorUnit& unit, const ActuatorLimits& limits) noexcept {
  if (unit.commanded_length <= limits.min) return at_base(unit, limits);
  return unit.internal_estimate == unit.commanded_length;
}

ActuatorUnit step_actuator(ActuatorUnit unit, double dt, const ActuatorNoise& noise, const ActuatorLimits& limits) {
  if (!(dt > 0.0)) throw InvalidArgument("step_actuator: dt must be > 0");
  if (unit.commanded_length != unit.motion_target) {
    unit.motion_target = unit.commanded_length;
    unit.rate_scale = 1.0;
    if (noise.enabled && noise.sigma_rate > 0.0) {
      const double eps = noise.sigma_rate * CounterRng(noise.seed).normal(noise.stream, unit.motions);
      unit.rate_scale = std::max(0.05, 1.0 + eps);
    }
    ++unit.motions;
  }

  const double nominal = limits.rate * dt;
  if (unit.commanded_length <= limits.min) {
    // Retract to base: the limit switch, not the estimate, ends the motion.
    if (unit.length > limits.min) {
      unit.internal_estimate = std::max(limits.min, unit.internal_estimate - nominal);
      unit.length = std::max(limits.min, unit.length - nominal * unit.rate_scale);
    }
    return trigger_limit_switch(unit, limits);
  }

  const double remaining = unit.commanded_length - unit.internal_estimate;
  if (remaining == 0.0) return unit;
  const double step = std::min(nominal, std::fabs(remaining));
  const double direction = remaining > 0.0 ? 1.0 : -1.0;
  unit.internal_estimate = std::fabs(remaining) <= nominal ? unit.commanded_length
                                                           : unit.internal_estimate + direction * step;
  unit.length = std::clamp(unit.length + direction * step * unit.rate_scale, limits.min, limits.max);
  return trigger_limit_switch(unit, limits);
}

CurvedShape curved_geometry(double base_length, double strip_delta, double width) {
  if (!(width > 0.0)) throw InvalidArgument("curved_geometry: width must be > 0");
  if (!std::isfinite(base_length) || !std::isfinite(strip_delta)) {
    throw InvalidArgument("curved_geometry: non-finite input");
  }
  if (std::fabs(strip_delta) >= 2.0 * base_length) {
    throw InvalidArgument("curved_geometry: malformed arc, |delta| must be < 2 * base");
  }
  const double l1 = base_length + strip_delta / 2.0, l2 = base_length - strip_delta / 2.0;
  constexpr double kMin = 25.0, kMax = 200.0;
  if (l1 < kMin || l1 > kMax || l2 < kMin || l2 > kMax) {
    throw InvalidArgument("curved_geometry: strip lengths must lie in [25, 200]");
  }
  if (strip_delta == 0.0) {
    return Segment{{-base_length / 2.0, 0.0}, {base_length / 2.0, 0.0}};
  }
  const double sweep = strip_delta / width;
  const double radius = base_length / std::fabs(sweep);
  const double side = sweep > 0.0 ? 1.0 : -1.0;
  Arc arc;
  arc.center = {0.0, side * radius};
  arc.radius = radius;
  arc.start_angle = -side * std::numbers::pi / 2.0 - sweep / 2.0;
  arc.sweep = sweep;
  return arc;
}

Footprint footprint(const Pose& pose, std::span<const ActuatorUnit> units, const SimParams& params) {
  Footprint fp;
  fp.center = pose.position();
  fp.body_radius = params.body_radius;
  const Vec2 heading = unit_from_angle(pose.theta);
  constexpr double kExtendedEps = 1e-9;
  for (const ActuatorUnit& u : units) {
    const bool extended = u.length > params.actuator_min + kExtendedEps;
    switch (u.mount) {
      case Mount::Horizontal:
        if (extended) {
          fp.capsules.push_back({fp.center - heading * (u.length / 2.0), fp.center + heading * (u.length / 2.0),
                                 params.capsule_half_width});
        }
        break;
      case Mount::Curved: {
        if (!extended && u.strip_delta == 0.0) break;
        CurvedShape shape;
        try {
          shape = curved_geometry(u.length, u.strip_delta, 2.0 * params.capsule_half_width);
        } catch (const InvalidArgument&) {
          shape = Segment{{-u.length / 2.0, 0.0}, {u.length / 2.0, 0.0}};
        }
        auto to_world = [&](Vec2 local) { return fp.center + rotated(local, pose.theta); };
        if (const auto* seg = std::get_if<Segment>(&shape)) {
          fp.capsules.push_back({to_world(seg->a), to_world(seg->b), params.capsule_half_width});
        } else {
          const Arc& arc = std::get<Arc>(shape);
          constexpr int kPieces = 8;
          for (int i = 0; i < kPieces; ++i) {
            fp.capsules.push_back({to_world(arc.point(static_cast<double>(i) / kPieces)),
                                   to_world(arc.point(static_cast<double>(i + 1) / kPieces)),
                                   params.capsule_half_width});
          }
        }
        break;
      }
      case Mount::Vertical:
        fp.height = std::max(fp.height, u.length);
        break;
      case Mount::Volumetric:
      case Mount::Areal:
        // Four synchronously driven units spread the body outward.
        fp.body_radius = std::max(fp.body_radius, params.body_radius + (u.length - params.actuator_min) / 2.0);
        break;
    }
  }
  return fp;
}

double signed_distance(const Footprint& fp, Vec2 p) noexcept {
  double d = distance(p, fp.center) - fp.body_radius;
  for (const Capsule& c : fp.capsules) d = std::min(d, distance_to_segment(p, c.a, c.b) - c.radius);
  return d;
}

}  // namespace shapebots
