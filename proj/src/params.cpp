#include "shapebots/params.hpp"

#include <cmath>
#include <string>
#include <string_view>

#include "shapebots/error.hpp"
#include "shapebots/geometry.hpp"

namespace shapebots {

namespace {

struct DoubleField {
  std::string_view key;
  double SimParams::*member;
  bool degrees;
};

constexpr DoubleField kDoubleFields[] = {
    {"dt_physics", &SimParams::dt_physics, false},
    {"dt_control", &SimParams::dt_control, false},
    {"v_max", &SimParams::v_max, false},
    {"body_radius", &SimParams::body_radius, false},
    {"track_width", &SimParams::track_width, false},
    {"capsule_half_width", &SimParams::capsule_half_width, false},
    {"actuator_rate", &SimParams::actuator_rate, false},
    {"actuator_min", &SimParams::actuator_min, false},
    {"actuator_max", &SimParams::actuator_max, false},
    {"actuator_sigma_rate", &SimParams::actuator_sigma_rate, false},
    {"pos_threshold", &SimParams::pos_threshold, false},
    {"ang_threshold_deg", &SimParams::ang_threshold, true},
    {"kp", &SimParams::kp, false},
    {"ki", &SimParams::ki, false},
    {"kd", &SimParams::kd, false},
    {"integral_limit", &SimParams::integral_limit, false},
    {"rvo_time_horizon", &SimParams::rvo_time_horizon, false},
    {"rvo_neighbor_dist", &SimParams::rvo_neighbor_dist, false},
    {"safety_margin", &SimParams::safety_margin, false},
    {"world_width", &SimParams::world_width, false},
    {"world_height", &SimParams::world_height, false},
    {"tracking_loss_rate", &SimParams::tracking_loss_rate, false},
    {"position_noise_sigma", &SimParams::position_noise_sigma, false},
    {"move_threshold", &SimParams::move_threshold, false},
    {"orient_threshold_deg", &SimParams::orient_threshold, true},
    {"absence_timeout", &SimParams::absence_timeout, false},
};

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(std::string("invalid parameter: ") + what);
}

}  // namespace

void SimParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(positive(dt_physics), "dt_physics must be > 0");
  require(positive(dt_control), "dt_control must be > 0");
  require(dt_physics <= dt_control, "dt_physics must not exceed dt_control");
  require(positive(v_max), "v_max must be > 0");
  require(positive(body_radius), "body_radius must be > 0");
  require(positive(track_width), "track_width must be > 0");
  require(non_negative(capsule_half_width), "capsule_half_width must be >= 0");
  require(positive(actuator_rate), "actuator_rate must be > 0");
  require(positive(actuator_min) && actuator_max > actuator_min, "actuator range must be increasing");
  require(non_negative(actuator_sigma_rate), "actuator_sigma_rate must be >= 0");
  require(positive(pos_threshold) && positive(ang_threshold), "thresholds must be > 0");
  require(non_negative(kp) && non_negative(ki) && non_negative(kd), "PID gains must be >= 0");
  require(non_negative(integral_limit), "integral_limit must be >= 0");
  require(positive(rvo_time_horizon) && positive(rvo_neighbor_dist), "RVO horizon and cutoff must be > 0");
  require(non_negative(safety_margin), "safety_margin must be >= 0");
  require(!retract_only_on_collision, "retract_only_on_collision is reserved and not implemented");
  require(world_width > 2.0 * body_radius && world_height > 2.0 * body_radius, "world smaller than a robot");
  require(tracking_loss_rate >= 0.0 && tracking_loss_rate < 1.0, "tracking_loss_rate must be in [0, 1)");
  require(max_dropout_ticks >= 1, "max_dropout_ticks must be >= 1");
  require(non_negative(position_noise_sigma), "position_noise_sigma must be >= 0");
  require(non_negative(move_threshold) && non_negative(orient_threshold), "input thresholds must be >= 0");
  require(positive(absence_timeout), "absence_timeout must be > 0");
  require(max_push_passes >= 1, "max_push_passes must be >= 1");
}

void apply_params_json(SimParams& params, const nlohmann::json& patch, const char* path) {
  if (!patch.is_object()) throw SchemaError(path, "expected an object");
  SimParams next = params;
  for (const auto& [key, value] : patch.items()) {
    const std::string where = std::string(path) + "." + key;
    bool handled = false;
    for (const DoubleField& f : kDoubleFields) {
      if (f.key != key) continue;
      if (!value.is_number()) throw SchemaError(where, "expected a number");
      const double v = value.get<double>();
      next.*f.member = f.degrees ? deg_to_rad(v) : v;
      handled = true;
      break;
    }
    if (handled) continue;
    if (key == "actuator_noise" || key == "retract_only_on_collision") {
      if (!value.is_boolean()) throw SchemaError(where, "expected a boolean");
      (key == "actuator_noise" ? next.actuator_noise : next.retract_only_on_collision) = value.get<bool>();
    } else if (key == "max_dropout_ticks" || key == "max_push_passes") {
      if (!value.is_number_integer()) throw SchemaError(where, "expected an integer");
      (key == "max_dropout_ticks" ? next.max_dropout_ticks : next.max_push_passes) = value.get<int>();
    } else if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw SchemaError(where, "expected a non-negative integer");
      }
      next.seed = value.get<std::uint64_t>();
    } else {
      throw SchemaError(where, "unknown parameter");
    }
  }
  try {
    next.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(path, e.what());
  }
  params = next;
}

nlohmann::json params_to_json(const SimParams& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const DoubleField& f : kDoubleFields) {
    const double v = params.*f.member;
    j[std::string(f.key)] = f.degrees ? rad_to_deg(v) : v;
  }
  j["actuator_noise"] = params.actuator_noise;
  j["retract_only_on_collision"] = params.retract_only_on_collision;
  j["max_dropout_ticks"] = params.max_dropout_ticks;
  j["max_push_passes"] = params.max_push_passes;
  j["seed"] = params.seed;
  return j;
}

}  // namespace shapebots
