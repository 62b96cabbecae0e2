// gridtraffic: validate, run, replay and render scenarios.
//
// Exit codes: 0 ok, 1 usage / validation / divergence, 2 corrupt data.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "gridtraffic/core/error.hpp"
#include "gridtraffic/scenario/scenario.hpp"
#include "gridtraffic/stream/server.hpp"
#include "gridtraffic/trace/raster.hpp"
#include "gridtraffic/trace/trace.hpp"
#include "gridtraffic/util/json_writer.hpp"

namespace gt = gridtraffic;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

int exit_code_for(const gt::Error& e) {
  switch (e.code()) {
    case gt::ErrorCode::kCorruptTrace:
    case gt::ErrorCode::kCorruptState:
      return 2;
    default:
      return 1;
  }
}

void print_error(const gt::Error& e, bool as_json) {
  if (!as_json) {
    std::cerr << "error [" << gt::to_string(e.code()) << "]: " << e.what() << "\n";
    return;
  }
  gt::JsonWriter w;
  w.begin_object()
      .key("ok").value(false)
      .key("code").value(gt::to_string(e.code()))
      .key("message").value(e.what());
  if (!e.field().empty()) w.key("field").value(e.field());
  if (e.line() > 0) w.key("line").value(e.line()).key("column").value(e.column());
  w.end_object();
  std::cout << w.str() << "\n";
}

// --- validate -------------------------------------------------------------

struct ValidateArgs {
  std::string scenario;
  bool json = false;
};

int cmd_validate(const ValidateArgs& a) {
  try {
    const gt::Scenario s = gt::load_scenario(a.scenario);
    const gt::WorldMap world = gt::build_world(s);
    if (a.json) {
      gt::JsonWriter w;
      w.begin_object()
          .key("ok").value(true)
          .key("routes").value(static_cast<std::uint64_t>(world.routes().size()))
          .key("segments").value(static_cast<std::uint64_t>(world.segment_count()))
          .key("points").value(static_cast<std::uint64_t>(world.points().size()))
          .key("shared_points").value(static_cast<std::uint64_t>(world.shared_point_count()))
          .key("spawns").value(static_cast<std::uint64_t>(s.spawns.size()))
          .end_object();
      std::cout << w.str() << "\n";
    } else {
      std::cout << "ok: " << world.routes().size() << " routes, " << world.segment_count()
                << " segments, " << world.points().size() << " points, "
                << world.shared_point_count() << " shared points, " << s.spawns.size()
                << " spawns\n";
    }
    return 0;
  } catch (const gt::Error& e) {
    print_error(e, a.json);
    return 1;
  }
}

// --- run ------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  bool serve = false;
  int port = 5000;
  std::optional<std::int64_t> ticks;
  bool realtime = false;
  bool fast = false;
  std::string record;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> render_every;
  std::string render_dir = "frames";
  std::string host = "127.0.0.1";
};

int run_serve(const RunArgs& a, gt::Scenario s) {
  gt::ServerOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.realtime = !a.fast;
  opts.max_ticks = a.ticks;
  opts.record_path = a.record;
  opts.scenario_path = a.scenario;
  gt::StreamServer server(std::move(s), opts);
  const int port = server.start();
  std::cerr << "serving on http://" << a.host << ":" << port << " ("
            << (opts.realtime ? "realtime" : "fast") << ")\n";
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (server.stats().corrupt) break;
  }
  server.stop();
  const gt::ServerStats st = server.stats();
  std::cerr << "stopped after " << st.ticks_published << " ticks, " << st.missed_ticks
            << " missed\n";
  if (st.record_error) std::cerr << "warning: recording failed: " << *st.record_error << "\n";
  return st.corrupt ? 2 : 0;
}

int run_headless(const RunArgs& a, const gt::Scenario& s) {
  gt::Simulation sim = gt::make_simulation(s);
  std::unique_ptr<gt::TraceWriter> writer;
  if (!a.record.empty()) {
    try {
      writer = std::make_unique<gt::TraceWriter>(a.record, s.params.seed);
    } catch (const gt::Error& e) {
      std::cerr << "warning: " << e.what() << "; continuing unrecorded\n";
    }
  }
  if (a.render_every) std::filesystem::create_directories(a.render_dir);

  std::map<gt::EventKind, std::uint64_t> counts;
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(s.params.tick_dt));
  const auto epoch = std::chrono::steady_clock::now();
  for (std::int64_t k = 0; k < *a.ticks; ++k) {
    if (a.realtime) std::this_thread::sleep_until(epoch + k * period);
    const gt::TickReport report = sim.advance();
    for (const gt::SimEvent& e : report.events) ++counts[e.kind];
    const bool render = a.render_every && report.tick % *a.render_every == 0;
    if (!writer && !render) continue;
    const gt::TraceFrame frame = gt::capture_frame(sim, report);
    if (writer) {
      try {
        writer->write(frame);
      } catch (const gt::Error& e) {
        std::cerr << "warning: " << e.what() << "; continuing unrecorded\n";
        writer.reset();
      }
    }
    if (render) {
      char name[32];
      std::snprintf(name, sizeof name, "tick_%06lld.svg", static_cast<long long>(report.tick));
      gt::render_svg(sim.world(), s.intersection_pads, frame,
                     (std::filesystem::path(a.render_dir) / name).string());
    }
  }
  if (writer) {
    const gt::TraceFooter f = writer->finish();
    std::cout << "trace: " << a.record << " (" << f.frames << " frames, checksum "
              << f.checksum << ")\n";
  }
  std::cout << "ticks: " << *a.ticks << "\n";
  for (const auto& [kind, n] : counts) std::cout << gt::to_string(kind) << ": " << n << "\n";
  return 0;
}

int cmd_run(const RunArgs& a) {
  try {
    gt::Scenario s = gt::load_scenario(a.scenario);
    if (a.seed) s.params.seed = *a.seed;
    if (a.serve) return run_serve(a, std::move(s));
    if (!a.ticks) {
      std::cerr << "error: --ticks is required without --serve\n";
      return 1;
    }
    if (*a.ticks < 0) {
      std::cerr << "error: --ticks must be non-negative\n";
      return 1;
    }
    return run_headless(a, s);
  } catch (const gt::Error& e) {
    print_error(e, false);
    return exit_code_for(e);
  }
}

// --- replay ---------------------------------------------------------------

int cmd_replay(const std::string& trace_path, const std::string& scenario_path) {
  try {
    const gt::Trace trace = gt::read_trace(trace_path);
    const gt::Scenario s = gt::load_scenario(scenario_path);
    const gt::VerifyReport r = gt::verify_trace(trace, s);
    if (r.identical) {
      std::cout << "identical (" << r.frames << " frames)\n";
      return 0;
    }
    std::cout << "divergent at tick " << *r.first_divergent_tick << ": " << r.detail << "\n";
    return 1;
  } catch (const gt::Error& e) {
    print_error(e, false);
    return exit_code_for(e);
  }
}

// --- render ---------------------------------------------------------------

struct RenderArgs {
  std::string trace;
  std::string scenario;
  std::int64_t tick = 0;
  std::string svg;
  std::string channels;
  std::string view = "bird";
  double cell = 0.5;
  double window = 40.0;
  bool binary = false;
};

int cmd_render(const RenderArgs& a) {
  try {
    if (a.svg.empty() == a.channels.empty()) {
      std::cerr << "error: give exactly one of --svg or --channels\n";
      return 1;
    }
    const gt::Trace trace = gt::read_trace(a.trace);
    const gt::Scenario s = gt::load_scenario(a.scenario);
    const gt::WorldMap world = gt::build_world(s);
    auto it = std::find_if(trace.frames.begin(), trace.frames.end(),
                           [&](const gt::TraceFrame& f) { return f.tick == a.tick; });
    if (it == trace.frames.end()) {
      std::cerr << "error: tick " << a.tick << " is out of range (trace has "
                << trace.frames.size() << " frames)\n";
      return 1;
    }
    if (!a.svg.empty()) {
      gt::render_svg(world, s.intersection_pads, *it, a.svg);
      std::cout << "wrote " << a.svg << "\n";
      return 0;
    }
    gt::View view = gt::BirdView{};
    if (a.view.rfind("vehicle:", 0) == 0) {
      gt::VehicleView vv;
      try {
        vv.id = std::stoi(a.view.substr(8));
      } catch (const std::exception&) {
        std::cerr << "error: --view expects bird or vehicle:ID\n";
        return 1;
      }
      vv.window_width = vv.window_length = a.window;
      view = vv;
    } else if (a.view != "bird") {
      std::cerr << "error: --view expects bird or vehicle:ID\n";
      return 1;
    }
    const gt::ChannelFrame frame = gt::rasterize(world, s.intersection_pads, *it, view, a.cell);
    for (const std::string& p : gt::write_channel_pgms(frame, a.channels)) {
      std::cout << "wrote " << p << "\n";
    }
    if (a.binary) {
      const std::string p = (std::filesystem::path(a.channels) / "frame.chfr").string();
      gt::write_channel_binary(frame, p);
      std::cout << "wrote " << p << "\n";
    }
    return 0;
  } catch (const gt::Error& e) {
    print_error(e, false);
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-quantized traffic simulator"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Parse and build a scenario, print counts");
  validate->add_option("scenario", va.scenario, "Scenario JSON")->required();
  validate->add_flag("--json", va.json, "Machine-readable output");

  RunArgs ra;
  if (const char* port = std::getenv("PORT")) {
    try {
      ra.port = std::stoi(port);
    } catch (const std::exception&) {
    }
  }
  auto* run = app.add_subcommand("run", "Run headless or serve over HTTP");
  run->add_option("scenario", ra.scenario, "Scenario JSON")->required();
  auto* serve = run->add_flag("--serve", ra.serve, "Start the HTTP server");
  run->add_option("--port", ra.port, "HTTP port (default 5000, or $PORT)")->needs(serve);
  run->add_option("--host", ra.host, "Bind address")->needs(serve);
  run->add_option("--ticks", ra.ticks, "Ticks to run (serve mode: stop ticking after N)");
  auto* realtime = run->add_flag("--realtime", ra.realtime, "Tick at wall-clock rate");
  auto* fast = run->add_flag("--fast", ra.fast, "Tick unthrottled");
  realtime->excludes(fast);
  run->add_option("--record", ra.record, "Record a trace to this path");
  run->add_option("--seed", ra.seed, "Override the scenario seed");
  run->add_option("--render-every", ra.render_every, "Write an SVG every N ticks")
      ->check(CLI::PositiveNumber);
  run->add_option("--render-dir", ra.render_dir, "Directory for --render-every output");

  std::string rp_trace, rp_scenario;
  auto* replay = app.add_subcommand("replay", "Verify a trace against a scenario");
  replay->add_option("trace", rp_trace, "Trace file")->required();
  replay->add_option("scenario", rp_scenario, "Scenario JSON")->required();

  RenderArgs rd;
  auto* render = app.add_subcommand("render", "Render one trace frame");
  render->add_option("trace", rd.trace, "Trace file")->required();
  render->add_option("--scenario", rd.scenario, "Scenario the trace was recorded from")->required();
  render->add_option("--tick", rd.tick, "Frame tick")->required();
  render->add_option("--svg", rd.svg, "Write an SVG snapshot");
  render->add_option("--channels", rd.channels, "Write one PGM per channel into DIR");
  render->add_option("--view", rd.view, "bird or vehicle:ID");
  render->add_option("--cell", rd.cell, "Cell size in meters")->check(CLI::PositiveNumber);
  render->add_option("--window", rd.window, "Vehicle view window in meters")->check(CLI::PositiveNumber);
  render->add_flag("--binary", rd.binary, "Also write frame.chfr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (validate->parsed()) return cmd_validate(va);
  if (run->parsed()) return cmd_run(ra);
  if (replay->parsed()) return cmd_replay(rp_trace, rp_scenario);
  if (render->parsed()) return cmd_render(rd);
  return 1;
}
