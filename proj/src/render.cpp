#include "shapebots/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "shapebots/error.hpp"

namespace shapebots {

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string num(double v) { return fmt("%.3f", v); }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Light grey at base length to dark blue at full extension.
std::string height_shade(double extension, const SimParams& p) {
  const double f = std::clamp((extension - p.actuator_min) / (p.actuator_max - p.actuator_min), 0.0, 1.0);
  const int r = static_cast<int>(std::lround(220 - 200 * f));
  const int g = static_cast<int>(std::lround(220 - 160 * f));
  const int b = static_cast<int>(std::lround(230 - 40 * f));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::vector<TrajectoryRecord> snapshot_records(const WorldState& world) {
  TrajectoryLog log;
  log.record(world);
  return log.records();
}

std::string render_frame(std::span<const TrajectoryRecord> robots, std::span<const Polyline> reference,
                         std::span<const DiscObject> objects, const SimParams& params) {
  const double w = params.world_width;
  const double h = params.world_height;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "mm\" height=\"" + num(h) +
       "mm\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) +
       "\" fill=\"#fbfbf8\" stroke=\"#999\" stroke-width=\"1\"/>\n";

  s += "<g id=\"reference\" fill=\"none\" stroke=\"#e07a5f\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\">\n";
  for (const Polyline& pl : reference) {
    s += pl.closed() ? "<polygon points=\"" : "<polyline points=\"";
    for (std::size_t i = 0; i < pl.points().size(); ++i) {
      if (i) s += ' ';
      s += num(pl.points()[i].x) + "," + num(pl.points()[i].y);
    }
    s += "\"/>\n";
  }
  s += "</g>\n";

  s += "<g id=\"objects\">\n";
  for (const DiscObject& o : objects) {
    s += "<circle cx=\"" + num(o.center.x) + "\" cy=\"" + num(o.center.y) + "\" r=\"" + num(o.radius) +
         "\" fill=\"" + (o.pushable ? "#c9b458" : "#6d6875") + "\"/>\n";
  }
  s += "</g>\n";

  const double half = 18.0;  // 36 mm housing
  s += "<g id=\"robots\">\n";
  for (const TrajectoryRecord& r : robots) {
    const std::string deg = num(r.pose.theta * 180.0 / 3.141592653589793);
    s += "<g class=\"robot\" data-id=\"" + std::to_string(r.id) + "\" data-phase=\"" +
         xml_escape(std::string(to_string(r.phase))) + "\" transform=\"translate(" + num(r.pose.x) + " " +
         num(r.pose.y) + ") rotate(" + deg + ")\">\n";
    const bool extended = r.extension > params.actuator_min + 1e-9;
    std::string fill = "#3d405b";
    if (r.mount == "vertical") fill = height_shade(r.extension, params);
    if (r.mount == "horizontal" && extended) {
      s += "<line x1=\"" + num(-r.extension / 2.0) + "\" y1=\"0\" x2=\"" + num(r.extension / 2.0) +
           "\" y2=\"0\" stroke=\"#81b29a\" stroke-width=\"6\" stroke-linecap=\"round\"/>\n";
    }
    s += "<rect x=\"" + num(-half) + "\" y=\"" + num(-half) + "\" width=\"" + num(2 * half) + "\" height=\"" +
         num(2 * half) + "\" fill=\"" + fill + "\" stroke=\"#222\" stroke-width=\"1\"/>\n";
    s += "<line x1=\"0\" y1=\"0\" x2=\"" + num(half) + "\" y2=\"0\" stroke=\"#fff\" stroke-width=\"2\"/>\n";
    s += "</g>\n";
    if (r.mount == "vertical" && extended) {
      s += "<text x=\"" + num(r.pose.x) + "\" y=\"" + num(r.pose.y - half - 4) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + fmt("%.0f", r.extension) + "</text>\n";
    }
  }
  s += "</g>\n</svg>\n";
  return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace shapebots
