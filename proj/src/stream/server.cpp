#include "gridtraffic/stream/server.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "gridtraffic/core/error.hpp"
#include "gridtraffic/stream/protocol.hpp"
#include "gridtraffic/trace/trace.hpp"
#include "gridtraffic/util/json_writer.hpp"
#include "httplib.h"

namespace gridtraffic {

namespace {

using Clock = std::chrono::steady_clock;
constexpr const char* kJson = "application/json";

// Everything a request handler may read; replaced wholesale once per tick.
struct Snapshot {
  Tick tick = -1;                    // last completed tick, -1 before the first
  std::vector<PosePacket> poses;     // spawned vehicles, id order
  std::size_t vehicle_count = 0;     // ids below this are known to the engine
  std::shared_ptr<const std::string> line_segments;
};

std::string error_body(const std::string& message, const std::string& field = {}) {
  JsonWriter w;
  w.begin_object().key("error").value(message);
  if (!field.empty()) w.key("field").value(field);
  w.end_object();
  return w.take();
}

}  // namespace

struct StreamServer::Impl {
  Impl(Scenario s, ServerOptions o) : scenario(std::move(s)), options(std::move(o)) {}

  Scenario scenario;
  ServerOptions options;
  httplib::Server http;
  int bound_port = 0;

  // Owned by the clock thread after start().
  std::optional<Simulation> sim;
  std::unique_ptr<TraceWriter> writer;

  mutable std::mutex snap_mu;
  std::shared_ptr<const Snapshot> snapshot;

  std::mutex queue_mu;
  std::vector<Command> queue;
  bool reset_requested = false;
  bool corrupt_requested = false;

  mutable std::mutex state_mu;
  std::condition_variable state_cv;
  bool stopping = false;
  ServerStats stats;

  std::thread clock_thread;
  std::thread http_thread;
  bool started = false;

  std::shared_ptr<const Snapshot> current() const {
    std::lock_guard lock(snap_mu);
    return snapshot;
  }

  bool corrupt() const {
    std::lock_guard lock(state_mu);
    return stats.corrupt;
  }

  void load() {
    sim.emplace(make_simulation(scenario));
    auto snap = std::make_shared<Snapshot>();
    snap->line_segments = std::make_shared<const std::string>(
        emit_line_segments(sim->world(), scenario.intersection_pads));
    snap->vehicle_count = sim->vehicles().size();
    std::lock_guard lock(snap_mu);
    snapshot = std::move(snap);
  }

  void open_recording() {
    if (options.record_path.empty()) return;
    try {
      writer = std::make_unique<TraceWriter>(options.record_path, scenario.params.seed);
    } catch (const Error& e) {
      note_record_error(e.what());
    }
  }

  void close_recording() {
    if (!writer) return;
    try {
      writer->finish();
    } catch (const Error& e) {
      note_record_error(e.what());
    }
    writer.reset();
  }

  void note_record_error(const std::string& what) {
    std::lock_guard lock(state_mu);
    stats.record_error = what;
  }

  void do_reset() {
    close_recording();
    if (!options.scenario_path.empty()) {
      try {
        scenario = load_scenario(options.scenario_path);
      } catch (const Error&) {
        // keep serving the previous scenario
      }
    }
    load();
    std::lock_guard lock(state_mu);
    stats.ticks_published = 0;
    stats.missed_ticks = 0;
    stats.corrupt = false;
  }

  // One tick boundary plus step. Returns false when the engine failed.
  bool tick_once() {
    std::vector<Command> commands;
    bool wipe = false;
    {
      std::lock_guard lock(queue_mu);
      commands.swap(queue);
      std::swap(wipe, corrupt_requested);
    }
    if (wipe) sim->mutable_world().clear_occupancy();
    for (Command& c : commands) sim->submit(std::move(c));
    TickReport report;
    try {
      report = sim->advance();
    } catch (const Error&) {
      std::lock_guard lock(state_mu);
      stats.corrupt = true;
      state_cv.notify_all();
      return false;
    }
    auto snap = std::make_shared<Snapshot>();
    snap->tick = report.tick;
    snap->poses = snapshot_poses(sim->world(), sim->vehicles(), report.tick);
    snap->vehicle_count = sim->vehicles().size();
    snap->line_segments = current()->line_segments;
    if (writer) {
      try {
        writer->write(TraceFrame{report.tick, snap->poses, report.events, report.commands});
      } catch (const Error& e) {
        note_record_error(e.what());
        writer.reset();
      }
    }
    {
      std::lock_guard lock(snap_mu);
      snapshot = std::move(snap);
    }
    std::lock_guard lock(state_mu);
    ++stats.ticks_published;
    state_cv.notify_all();
    return true;
  }

  void clock_loop() {
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(scenario.params.tick_dt));
    auto epoch = Clock::now();
    Tick k = 0;
    while (true) {
      bool want_reset = false;
      {
        std::lock_guard lock(queue_mu);
        want_reset = reset_requested;
        reset_requested = false;
        if (want_reset) queue.clear();
      }
      if (want_reset) {
        do_reset();
        open_recording();
        epoch = Clock::now();
        k = 0;
      }

      const bool idle = corrupt() || (options.max_ticks && k >= *options.max_ticks);
      if (idle) {
        std::unique_lock lock(state_mu);
        state_cv.wait_for(lock, std::chrono::milliseconds(20), [&] { return stopping; });
        if (stopping) return;
        continue;
      }

      if (options.realtime) {
        std::unique_lock lock(state_mu);
        if (state_cv.wait_until(lock, epoch + k * period, [&] { return stopping; })) return;
      } else {
        std::lock_guard lock(state_mu);
        if (stopping) return;
      }

      if (!tick_once()) continue;
      ++k;
      if (options.realtime && Clock::now() > epoch + k * period) {
        std::lock_guard lock(state_mu);
        ++stats.missed_ticks;
      }
      if (!options.realtime) std::this_thread::yield();
    }
  }

  static std::optional<VehicleId> car_id(const httplib::Request& req) {
    const std::string digits = req.matches[1];
    return static_cast<VehicleId>(std::stoi(digits));
  }

  void routes() {
    http.Get("/line_segments", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(*current()->line_segments, kJson);
    });

    http.Get(R"(/car(\d{2}))", [this](const httplib::Request& req, httplib::Response& res) {
      if (corrupt()) {
        res.status = 503;
        res.set_content(error_body("engine is in a corrupt state"), kJson);
        return;
      }
      const auto snap = current();
      const VehicleId id = *car_id(req);
      auto it = std::lower_bound(snap->poses.begin(), snap->poses.end(), id,
                                 [](const PosePacket& p, VehicleId v) { return p.id < v; });
      if (it == snap->poses.end() || it->id != id) {
        res.status = 404;
        res.set_content(error_body("no such vehicle"), kJson);
        return;
      }
      res.set_content(encode_pose(*it), kJson);
    });

    http.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
      if (corrupt()) {
        res.status = 503;
        res.set_content(error_body("engine is in a corrupt state"), kJson);
        return;
      }
      const auto snap = current();
      JsonWriter w;
      w.begin_object().key("tick").value(static_cast<std::int64_t>(snap->tick));
      w.key("vehicles").begin_array();
      for (const PosePacket& p : snap->poses) {
        if (p.active) write_pose(w, p);
      }
      w.end_array().end_object();
      res.set_content(w.take(), kJson);
    });

    http.Post(R"(/car(\d{2})/command)", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      if (corrupt()) {
        res.status = 503;
        res.set_content(error_body("engine is in a corrupt state"), kJson);
        return;
      }
      const VehicleId id = *car_id(req);
      Command c;
      try {
        c = decode_command(req.body, id);
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(error_body(e.what(), e.field()), kJson);
        return;
      }
      if (static_cast<std::size_t>(id) >= current()->vehicle_count) {
        res.status = 404;
        res.set_content(error_body("no such vehicle"), kJson);
        return;
      }
      {
        std::lock_guard lock(queue_mu);
        queue.push_back(std::move(c));
      }
      res.status = 202;
      res.set_content(R"({"queued":true})", kJson);
    });

    http.Post("/reset", [this](const httplib::Request&, httplib::Response& res) {
      {
        std::lock_guard lock(queue_mu);
        reset_requested = true;
      }
      res.status = 202;
      res.set_content(R"({"reset":"scheduled"})", kJson);
    });

    http.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      const auto snap = current();
      ServerStats s;
      {
        std::lock_guard lock(state_mu);
        s = stats;
      }
      JsonWriter w;
      w.begin_object()
          .key("status").value(s.corrupt ? "corrupt" : "ok")
          .key("tick").value(static_cast<std::int64_t>(snap->tick))
          .key("ticks_published").value(static_cast<std::int64_t>(s.ticks_published))
          .key("missed_ticks").value(s.missed_ticks)
          .key("mode").value(options.realtime ? "realtime" : "fast")
          .key("recording").value(static_cast<bool>(s.record_error) ? false : !options.record_path.empty())
          .end_object();
      if (s.corrupt) res.status = 503;
      res.set_content(w.take(), kJson);
    });
  }
};

StreamServer::StreamServer(Scenario scenario, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(options))) {
  impl_->load();
}

StreamServer::~StreamServer() { stop(); }

int StreamServer::start() {
  Impl& m = *impl_;
  if (m.started) return m.bound_port;
  m.routes();
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // server silently share a busy port.
  m.http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
               sizeof(yes));
  });
  if (m.options.port == 0) {
    m.bound_port = m.http.bind_to_any_port(m.options.host);
    if (m.bound_port <= 0) throw Error(ErrorCode::kIoError, "cannot bind any port");
  } else {
    if (!m.http.bind_to_port(m.options.host, m.options.port)) {
      throw Error(ErrorCode::kIoError,
                  "port " + std::to_string(m.options.port) + " is unavailable");
    }
    m.bound_port = m.options.port;
  }
  m.open_recording();
  m.started = true;
  m.http_thread = std::thread([&m] { m.http.listen_after_bind(); });
  m.clock_thread = std::thread([&m] { m.clock_loop(); });
  return m.bound_port;
}

void StreamServer::stop() {
  Impl& m = *impl_;
  if (!m.started) return;
  {
    std::lock_guard lock(m.state_mu);
    m.stopping = true;
  }
  m.state_cv.notify_all();
  if (m.clock_thread.joinable()) m.clock_thread.join();
  m.http.stop();
  if (m.http_thread.joinable()) m.http_thread.join();
  m.close_recording();
  m.started = false;
}

bool StreamServer::wait_for_ticks(Tick ticks, std::chrono::milliseconds timeout) {
  Impl& m = *impl_;
  std::unique_lock lock(m.state_mu);
  return m.state_cv.wait_for(lock, timeout, [&] {
    return m.stats.ticks_published >= ticks || m.stats.corrupt || m.stopping;
  }) && m.stats.ticks_published >= ticks;
}

ServerStats StreamServer::stats() const {
  std::lock_guard lock(impl_->state_mu);
  return impl_->stats;
}

int StreamServer::port() const noexcept { return impl_->bound_port; }

void StreamServer::corrupt_for_testing() {
  std::lock_guard lock(impl_->queue_mu);
  impl_->corrupt_requested = true;
}

}  // namespace gridtraffic
