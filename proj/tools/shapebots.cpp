// Headless runner, comparison harness and server entry point.
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "shapebots/compare.hpp"
#include "shapebots/error.hpp"
#include "shapebots/render.hpp"
#include "shapebots/scenario.hpp"
#include "shapebots/server/http_server.hpp"
#include "shapebots/server/service.hpp"
#include "shapebots/svg.hpp"

namespace fs = std::filesystem;
using namespace shapebots;

namespace {

std::atomic<bool> interrupted{false};

void on_signal(int) { interrupted = true; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw fs::filesystem_error("cannot open", path, std::make_error_code(std::errc::no_such_file_or_directory));
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RenderMode parse_mode(const std::string& s) { return s == "point" ? RenderMode::Point : RenderMode::Line; }

std::vector<Polyline> load_contours(const fs::path& path) {
  std::vector<Polyline> contours = parse_svg(read_file(path));
  if (contours.empty()) throw InvalidArgument(path.string() + ": no drawable contours");
  return contours;
}

// Default scenario for --serve without a document: a grid of robots, no shape.
Scenario idle_scenario(std::size_t n) {
  Scenario s;
  s.name = "idle";
  s.robots = make_robots(grid_layout(n, {60, 60}, {s.params.world_width - 60, s.params.world_height - 60}, 80),
                         {Mount::Horizontal, Mount::Vertical});
  return s;
}

int serve(Scenario scenario, unsigned short port, const fs::path& ui_dir, const fs::path& scenario_dir) {
  ServiceOptions so;
  so.scenario_dir = scenario_dir;
  SimulationService service(std::move(scenario), so);
  HttpServerOptions ho;
  ho.port = port;
  ho.ui_dir = ui_dir;
  HttpServer server(service, ho);
  server.start();
  std::printf("listening on port %u\n", static_cast<unsigned>(server.port()));
  std::fflush(stdout);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shapebots: swarm shape-changing display simulator"};
  std::string command;
  std::string scenario_path, svg_path, mode_name = "line", metrics_path, log_path, render_path, ui_dir;
  std::size_t robots = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> compare_counts;
  bool do_serve = false;
  unsigned short port = default_port();

  app.add_option("command", command, "optional 'run'")->check(CLI::IsMember({"run"}));
  app.add_option("--scenario", scenario_path, "scenario JSON document");
  app.add_option("--svg", svg_path, "SVG drawing to form");
  app.add_option("--robots", robots, "robot count for --svg")->check(CLI::PositiveNumber);
  app.add_option("--mode", mode_name, "render mode for SVG shapes")->check(CLI::IsMember({"line", "point"}));
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--metrics", metrics_path, "write metrics JSON here (stdout otherwise)");
  app.add_option("--log", log_path, "write the trajectory log here");
  app.add_option("--render", render_path, "final frame SVG (a directory with --compare)");
  app.add_option("--compare", compare_counts, "robot counts for a line vs point comparison")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_flag("--serve", do_serve, "serve the scenario over HTTP/WebSocket");
  app.add_option("--port", port, "server port (env SHAPEBOTS_PORT, default 8080)");
  app.add_option("--ui", ui_dir, "static UI directory for --serve");
  auto* mode_opt = app.get_option("--mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!scenario_path.empty() && !svg_path.empty()) throw UsageError("--scenario and --svg are exclusive");
    if (!compare_counts.empty()) {
      if (svg_path.empty()) throw UsageError("--compare needs --svg");
      if (do_serve) throw UsageError("--compare and --serve are exclusive");
      CompareOptions opt;
      opt.counts = compare_counts;
      opt.seed = seed;
      opt.label = fs::path(svg_path).stem().string();
      if (mode_opt->count() > 0) opt.modes = {parse_mode(mode_name)};
      if (!render_path.empty()) {
        fs::create_directories(render_path);
        opt.image_dir = render_path;
      }
      const CompareReport report = compare(load_contours(svg_path), opt);
      std::cout << report.table();
      if (!metrics_path.empty()) write_text_file(metrics_path, report.to_json().dump(2) + "\n");
      return 0;
    }

    Scenario scenario;
    bool have_scenario = true;
    if (!scenario_path.empty()) {
      if (robots > 0) throw UsageError("--robots applies to --svg only");
      scenario = load_scenario(scenario_path);
      if (mode_opt->count() > 0) {
        for (ShapeSpec& f : scenario.frames) {
          if (auto* c = std::get_if<SvgContour>(&f)) c->mode = parse_mode(mode_name);
        }
      }
    } else if (!svg_path.empty()) {
      CompareOptions opt;
      opt.label = fs::path(svg_path).stem().string();
      const std::size_t n = robots > 0 ? robots : 30;
      opt.counts = {n};
      opt.seed = seed;
      scenario = comparison_scenario(load_contours(svg_path), n, parse_mode(mode_name), opt);
    } else {
      have_scenario = false;
    }
    if (seed_opt->count() > 0) scenario.params.seed = seed;

    if (do_serve) {
      if (!have_scenario) scenario = idle_scenario(robots > 0 ? robots : 10);
      const fs::path dir = scenario_path.empty() ? fs::path("scenarios") : fs::path(scenario_path).parent_path();
      return serve(std::move(scenario), port, ui_dir, dir);
    }
    if (!have_scenario) throw UsageError("nothing to run: give --scenario or --svg");

    const RunResult result = run_scenario(scenario);
    const std::string metrics = metrics_to_json(result.metrics, scenario).dump(2) + "\n";
    if (metrics_path.empty()) std::cout << metrics;
    else write_text_file(metrics_path, metrics);
    if (!log_path.empty()) write_text_file(log_path, result.log.str());
    if (!render_path.empty()) {
      const auto records = snapshot_records(result.final_world);
      write_text_file(render_path,
                      render_frame(records, result.reference, result.final_world.objects, scenario.params));
    }
    if (!result.metrics.completed) {
      std::fprintf(stderr, "shapebots: %s did not settle within %.1f s\n", scenario.name.c_str(),
                   scenario.time_limit);
      return 1;
    }
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "shapebots: %s\n", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "shapebots: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "shapebots: %s\n", e.what());
    return 1;
  }
}
