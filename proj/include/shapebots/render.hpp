#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shapebots/params.hpp"
#include "shapebots/trajectory_log.hpp"
#include "shapebots/world.hpp"

namespace shapebots {

/// SVG image of one instant: robots as oriented squares, horizontal
/// extensions as bars, vertical extensions as a shaded height label, objects
/// as discs and the reference contours underneath.
std::string render_frame(std::span<const TrajectoryRecord> robots, std::span<const Polyline> reference,
                         std::span<const DiscObject> objects, const SimParams& params);

std::vector<TrajectoryRecord> snapshot_records(const WorldState& world);

/// Writes `content` to `path`; throws Error when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace shapebots
