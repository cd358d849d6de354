#include "shapebots/interaction.hpp"

#include <cmath>

#include "shapebots/error.hpp"
#include "shapebots/params.hpp"

namespace shapebots {

namespace {

constexpr double kMinLever = 1.0;  // mm

Vec2 scale_about(Vec2 p, Vec2 c, double f) { return c + (p - c) * f; }

}  // namespace

std::string_view to_string(InputKind k) noexcept {
  switch (k) {
    case InputKind::Place: return "place";
    case InputKind::Move: return "move";
    case InputKind::Orient: return "orient";
    case InputKind::PickUp: return "pickup";
  }
  return "?";
}

InputClassifier::InputClassifier(const SimParams& params)
    : move_threshold_(params.move_threshold),
      orient_threshold_(params.orient_threshold),
      absence_timeout_(params.absence_timeout) {}

void InputClassifier::configure(const SimParams& params) {
  move_threshold_ = params.move_threshold;
  orient_threshold_ = params.orient_threshold;
  absence_timeout_ = params.absence_timeout;
}

Pose InputClassifier::reference(const Track& t) const {
  const double n = static_cast<double>(t.samples);
  return {t.sum.x / n, t.sum.y / n, heading_of(t.heading_sum)};
}

void InputClassifier::reset_reference(Track& t, const Pose& pose) const {
  t.sum = pose.position();
  t.heading_sum = unit_from_angle(pose.theta);
  t.samples = 1;
  t.pending = 0;
}

void InputClassifier::forget(int id) { tracks_.erase(id); }

std::vector<InputEvent> InputClassifier::observe(const ObservationFrame& frame, const std::set<int>& driven) {
  std::vector<InputEvent> events;
  std::set<int> seen;
  for (const Observation& o : frame.robots) {
    if (!o.present) continue;
    seen.insert(o.id);
    auto it = tracks_.find(o.id);
    if (it == tracks_.end()) {
      Track t;
      reset_reference(t, o.pose);
      t.last = o.pose;
      t.last_seen = frame.time;
      tracks_.emplace(o.id, t);
      events.push_back({InputKind::Place, o.id, o.pose, o.pose, frame.time});
      continue;
    }
    Track& t = it->second;
    const bool was_driven = t.driven || driven.contains(o.id);
    t.driven = false;
    t.last_seen = frame.time;
    if (t.picked_up) {
      t.picked_up = false;
      reset_reference(t, o.pose);
      t.last = o.pose;
      events.push_back({InputKind::Place, o.id, o.pose, o.pose, frame.time});
      continue;
    }
    if (was_driven) {
      reset_reference(t, o.pose);
      t.last = o.pose;
      continue;
    }
    const Pose ref = reference(t);
    const double moved = distance(ref.position(), o.pose.position());
    const double turned = std::fabs(angle_difference(o.pose.theta, ref.theta));
    const bool displaced = moved > move_threshold_ || turned > orient_threshold_;
    if (!displaced) {
      t.pending = 0;
      t.sum = t.sum + o.pose.position();
      t.heading_sum = t.heading_sum + unit_from_angle(o.pose.theta);
      ++t.samples;
    } else if (++t.pending == 1) {
      t.first_displaced = o.pose;
    } else {
      // Confirmed only if the two sightings agree on the displacement.
      const Pose mean{(t.first_displaced.x + o.pose.x) / 2.0, (t.first_displaced.y + o.pose.y) / 2.0,
                      heading_of(unit_from_angle(t.first_displaced.theta) + unit_from_angle(o.pose.theta))};
      const double mean_moved = distance(ref.position(), mean.position());
      const double mean_turned = std::fabs(angle_difference(mean.theta, ref.theta));
      if (mean_moved > move_threshold_ || mean_turned > orient_threshold_) {
        const InputKind kind = mean_moved > move_threshold_ ? InputKind::Move : InputKind::Orient;
        events.push_back({kind, o.id, ref, o.pose, frame.time});
        reset_reference(t, t.first_displaced);
        t.sum = t.sum + o.pose.position();
        t.heading_sum = t.heading_sum + unit_from_angle(o.pose.theta);
        ++t.samples;
      } else {
        t.pending = 1;
        t.first_displaced = o.pose;
      }
    }
    t.last = o.pose;
  }
  for (auto& [id, t] : tracks_) {
    if (seen.contains(id)) continue;
    if (driven.contains(id)) t.driven = true;
    if (t.picked_up) continue;
    if (frame.time - t.last_seen >= absence_timeout_ - 1e-9) {
      t.picked_up = true;
      events.push_back({InputKind::PickUp, id, t.last, t.last, frame.time});
    }
  }
  return events;
}

std::vector<InputEvent> classify_input(std::span<const ObservationFrame> frames,
                                       std::span<const std::set<int>> driven, const SimParams& params) {
  if (driven.size() != frames.size()) throw InvalidArgument("need one driven set per frame");
  InputClassifier classifier(params);
  std::vector<InputEvent> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0 && frames[i].time < frames[i - 1].time) throw InvalidArgument("observation frames out of order");
    std::vector<InputEvent> ev = classifier.observe(frames[i], driven[i]);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

std::optional<ShapeSpec> refit_on_drag(const ShapeSpec& shape, const TargetSet& active, std::size_t moved_target,
                                       Vec2 new_position) {
  if (!std::holds_alternative<Rectangle>(shape) && !std::holds_alternative<DrawnLines>(shape)) return std::nullopt;
  if (active.entries.size() < 2 || moved_target >= active.entries.size()) return std::nullopt;
  Vec2 centroid;
  for (std::size_t i = 0; i < active.entries.size(); ++i) {
    if (i != moved_target) centroid = centroid + active.entries[i].goal.position();
  }
  centroid = centroid * (1.0 / static_cast<double>(active.entries.size() - 1));
  const double before = distance(active.entries[moved_target].goal.position(), centroid);
  const double after = distance(new_position, centroid);
  if (before < kMinLever || after < kMinLever) return std::nullopt;
  const double f = after / before;

  if (const auto* rect = std::get_if<Rectangle>(&shape)) {
    Rectangle out = *rect;
    out.width *= f;
    out.height *= f;
    out.center = scale_about(rect->center, centroid, f);
    return out;
  }
  DrawnLines out = std::get<DrawnLines>(shape);
  for (Segment& s : out.segments) {
    s.a = scale_about(s.a, centroid, f);
    s.b = scale_about(s.b, centroid, f);
  }
  return out;
}

std::optional<SineWave> refit_sine(const SineWave& wave, double moved_x, bool moved_first) {
  if (!std::isfinite(moved_x)) return std::nullopt;
  SineWave out = wave;
  if (moved_first) {
    const double fixed = wave.origin.x + wave.wavelength;
    if (!(fixed - moved_x > 0.0)) return std::nullopt;
    out.origin.x = moved_x;
    out.wavelength = fixed - moved_x;
  } else {
    if (!(moved_x - wave.origin.x > 0.0)) return std::nullopt;
    out.wavelength = moved_x - wave.origin.x;
  }
  return out;
}

}  // namespace shapebots
