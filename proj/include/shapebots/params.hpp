#pragma once

#include <cstdint>

#include "json.hpp"

namespace shapebots {

/// Every tunable constant of the simulation. Lengths in mm, times in s,
/// angles in radians unless the name says otherwise.
struct SimParams {
  // Timing.
  double dt_physics = 0.01;
  double dt_control = 0.151;  ///< sense-decide-act loop; also the observation delay

  // Robot body and drive.
  double v_max = 170.0;            ///< mm/s, straight-line
  double body_radius = 25.0;       ///< disc circumscribing the 36 mm housing
  double track_width = 30.0;       ///< wheel separation
  double capsule_half_width = 15.0;

  // Actuators.
  double actuator_rate = 33.0;     ///< mm/s
  double actuator_min = 25.0;
  double actuator_max = 200.0;
  bool actuator_noise = false;
  /// Std-dev of the per-motion rate multiplier. Default gives a mean absolute
  /// error of 3 mm on a 100 mm extension.
  double actuator_sigma_rate = 0.0375994;

  // Behavior thresholds.
  double pos_threshold = 10.0;
  double ang_threshold = 0.0872664625997164788;  ///< 5 degrees

  // Heading PID.
  double kp = 4.0;
  double ki = 0.0;
  double kd = 0.2;
  double integral_limit = 1.0;  ///< anti-windup bound on the integral, rad*s

  // Collision avoidance.
  double rvo_time_horizon = 2.0;
  double rvo_neighbor_dist = 200.0;
  double safety_margin = 2.0;  ///< extra clearance on top of two body radii
  /// Reserved: retract only when planning predicts a collision. Not implemented;
  /// must stay false.
  bool retract_only_on_collision = false;

  // World.
  double world_width = 1150.0;
  double world_height = 740.0;

  // Tracking model.
  double tracking_loss_rate = 0.079;  ///< per robot per control loop
  int max_dropout_ticks = 2;
  /// Mean radial position error of an observation, mm (0 disables).
  double position_noise_sigma = 0.0;

  // Input classification.
  double move_threshold = 5.0;
  double orient_threshold = 0.0872664625997164788;
  double absence_timeout = 0.5;

  int max_push_passes = 16;

  std::uint64_t seed = 0;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// Overlays a partial JSON object onto `params`. Unknown keys are a schema
/// error. Angles are given in degrees under `*_deg` keys.
void apply_params_json(SimParams& params, const nlohmann::json& patch, const char* path = "$.params");
nlohmann::json params_to_json(const SimParams& params);

}  // namespace shapebots
