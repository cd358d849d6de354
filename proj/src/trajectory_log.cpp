#include "shapebots/trajectory_log.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "shapebots/error.hpp"

namespace shapebots {

namespace {

std::string mount_name(const RobotState& r) {
  const int active = r.active_unit();
  if (active >= 0) return std::string(to_string(r.units[static_cast<std::size_t>(active)].mount));
  if (r.units.empty()) return "none";
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.units.size(); ++i) {
    if (r.units[i].length > r.units[best].length) best = i;
  }
  return std::string(to_string(r.units[best].mount));
}

template <typename T>
bool read_number(std::string_view tok, T& out) {
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && p == tok.data() + tok.size();
}

}  // namespace

BehaviorPhase phase_from_string(std::string_view name) {
  for (BehaviorPhase p : {BehaviorPhase::Idle, BehaviorPhase::Retracting, BehaviorPhase::Navigating,
                          BehaviorPhase::Orienting, BehaviorPhase::Transforming, BehaviorPhase::Holding}) {
    if (to_string(p) == name) return p;
  }
  throw InvalidArgument("unknown phase '" + std::string(name) + "'");
}

void TrajectoryLog::record(const WorldState& world) {
  for (const RobotState& r : world.robots) {
    records_.push_back({world.time, r.id, r.pose, mount_name(r), r.display_extension(), r.phase});
  }
}

std::vector<TrajectoryRecord> TrajectoryLog::last_frame() const {
  std::vector<TrajectoryRecord> out;
  if (records_.empty()) return out;
  const double t = records_.back().time;
  auto it = records_.end();
  while (it != records_.begin() && std::prev(it)->time == t) --it;
  out.assign(it, records_.end());
  return out;
}

void TrajectoryLog::write(std::ostream& out) const {
  out << kMagic << '\n' << "# time id x y theta mount extension phase\n";
  char buf[256];
  for (const TrajectoryRecord& r : records_) {
    std::snprintf(buf, sizeof buf, "%.6f %d %.6f %.6f %.6f %s %.6f %s\n", r.time, r.id, r.pose.x, r.pose.y,
                  r.pose.theta, r.mount.c_str(), r.extension, std::string(to_string(r.phase)).c_str());
    out << buf;
  }
}

std::string TrajectoryLog::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

TrajectoryLog TrajectoryLog::parse(std::string_view text) {
  TrajectoryLog log;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    const std::size_t offset = pos;
    pos = end + 1;
    if (first) {
      if (line != kMagic) throw ParseError("not a trajectory log (missing header)", offset);
      first = false;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> tok;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      const std::size_t j = std::min(line.find(' ', i), line.size());
      if (j > i) tok.push_back(line.substr(i, j - i));
      i = j;
    }
    TrajectoryRecord r;
    if (tok.size() != 8 || !read_number(tok[0], r.time) || !read_number(tok[1], r.id) ||
        !read_number(tok[2], r.pose.x) || !read_number(tok[3], r.pose.y) || !read_number(tok[4], r.pose.theta) ||
        !read_number(tok[6], r.extension)) {
      throw ParseError("malformed trajectory record", offset);
    }
    r.mount = std::string(tok[5]);
    try {
      r.phase = phase_from_string(tok[7]);
    } catch (const InvalidArgument&) {
      throw ParseError("unknown phase in trajectory record", offset);
    }
    log.records_.push_back(std::move(r));
  }
  if (first) throw ParseError("empty trajectory log", 0);
  return log;
}

}  // namespace shapebots
