#include "gridtraffic/trace/trace.hpp"

#include <sstream>

#include "gridtraffic/core/error.hpp"
#include "gridtraffic/util/json_writer.hpp"
#include "../stream/json_decode.hpp"

namespace gridtraffic {

std::string encode_frame(const TraceFrame& frame) {
  JsonWriter w;
  w.begin_object().key("tick").value(static_cast<std::int64_t>(frame.tick));
  w.key("vehicles").begin_array();
  for (const PosePacket& p : frame.vehicles) write_pose(w, p);
  w.end_array().key("events").begin_array();
  for (const SimEvent& e : frame.events) write_event(w, e);
  w.end_array().key("commands_applied").begin_array();
  for (const Command& c : frame.commands_applied) write_command(w, c);
  w.end_array().end_object();
  return w.take();
}

TraceFrame capture_frame(const Simulation& sim, const TickReport& report) {
  TraceFrame f;
  f.tick = report.tick;
  f.vehicles = snapshot_poses(sim.world(), sim.vehicles(), report.tick);
  f.events = report.events;
  f.commands_applied = report.commands;
  return f;
}

// --- writer -------------------------------------------------------------

TraceWriter::TraceWriter(const std::string& path, std::uint64_t seed)
    : path_(path), seed_(seed) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kRecordError, "cannot open trace file " + path);
}

TraceWriter::~TraceWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void TraceWriter::write(const TraceFrame& frame) {
  if (finished_) throw Error(ErrorCode::kRecordError, "trace already finished");
  if (last_tick_ && frame.tick <= *last_tick_) {
    throw Error(ErrorCode::kRecordError, "frame ticks must increase");
  }
  std::string line = encode_frame(frame);
  line.push_back('\n');
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  if (!out_) throw Error(ErrorCode::kRecordError, "write failed on " + path_);
  hash_.update(line);
  ++frames_;
  last_tick_ = frame.tick;
}

TraceFooter TraceWriter::finish() {
  TraceFooter footer{frames_, hash_.hex(), seed_};
  if (finished_) return footer;
  finished_ = true;
  JsonWriter w;
  w.begin_object().key("footer").begin_object()
      .key("frames").value(footer.frames)
      .key("checksum").value(footer.checksum)
      .key("seed").value(footer.seed)
      .end_object().end_object();
  std::string line = w.take();
  line.push_back('\n');
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.close();
  if (!out_) throw Error(ErrorCode::kRecordError, "cannot finalize trace " + path_);
  return footer;
}

// --- reader -------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptTrace, what);
}

TraceFrame frame_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "frame is not an object");
  for (const auto& [k, _] : j.items()) {
    if (k != "tick" && k != "vehicles" && k != "events" && k != "commands_applied") {
      throw Error(ErrorCode::kSchemaError, "unknown frame field " + k);
    }
  }
  TraceFrame f;
  const json& tick = j.at("tick");
  if (!tick.is_number_integer()) throw Error(ErrorCode::kSchemaError, "tick: expected an integer");
  f.tick = tick.get<Tick>();
  for (const json& v : j.at("vehicles")) f.vehicles.push_back(detail::pose_from_json(v, "vehicles[]"));
  for (const json& e : j.at("events")) f.events.push_back(detail::event_from_json(e, "events[]"));
  for (const json& c : j.at("commands_applied")) {
    f.commands_applied.push_back(detail::command_from_json(c, "commands_applied[]"));
  }
  return f;
}

}  // namespace

Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open trace file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (text.empty() || text.back() != '\n') corrupt("trace does not end with a footer line");
  Trace trace;
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }

  json footer;
  try {
    footer = json::parse(lines.back());
    const json& f = footer.at("footer");
    trace.footer.frames = f.at("frames").get<std::uint64_t>();
    trace.footer.checksum = f.at("checksum").get<std::string>();
    trace.footer.seed = f.at("seed").get<std::uint64_t>();
  } catch (const json::exception&) {
    corrupt("missing or malformed footer");
  }
  lines.pop_back();

  if (lines.size() != trace.footer.frames) {
    corrupt("footer claims " + std::to_string(trace.footer.frames) + " frames, found " +
            std::to_string(lines.size()));
  }
  Fnv1a64 hash;
  for (const std::string& line : lines) {
    hash.update(line);
    hash.update("\n");
  }
  if (hash.hex() != trace.footer.checksum) {
    corrupt("checksum mismatch: footer " + trace.footer.checksum + ", content " + hash.hex());
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      trace.frames.push_back(frame_from_json(json::parse(lines[i])));
    } catch (const json::exception& e) {
      corrupt("frame " + std::to_string(i) + ": " + e.what());
    } catch (const Error& e) {
      corrupt("frame " + std::to_string(i) + ": " + e.what());
    }
    if (i > 0 && trace.frames[i].tick <= trace.frames[i - 1].tick) {
      corrupt("frame ticks are not strictly increasing at frame " + std::to_string(i));
    }
  }
  trace.lines = std::move(lines);
  return trace;
}

CommandLog command_log(const Trace& trace) {
  CommandLog log;
  for (const TraceFrame& f : trace.frames) {
    if (!f.commands_applied.empty()) log[f.tick] = f.commands_applied;
  }
  return log;
}

HeadlessResult run_headless(Simulation& sim, Tick ticks, const CommandLog& log,
                            TraceWriter* writer, bool keep_frames) {
  HeadlessResult result;
  for (Tick k = 0; k < ticks; ++k) {
    if (auto it = log.find(sim.next_tick()); it != log.end()) {
      for (const Command& c : it->second) sim.submit(c);
    }
    const TickReport report = sim.advance();
    for (const SimEvent& e : report.events) ++result.event_counts[e.kind];
    if (writer == nullptr && !keep_frames) continue;
    TraceFrame frame = capture_frame(sim, report);
    if (writer != nullptr) {
      try {
        writer->write(frame);
      } catch (const Error& e) {
        result.record_error = e.what();
        writer = nullptr;
      }
    }
    if (keep_frames) result.frames.push_back(std::move(frame));
  }
  return result;
}

VerifyReport verify_trace(const Trace& trace, const Scenario& scenario) {
  Scenario s = scenario;
  s.params.seed = trace.footer.seed;
  Simulation sim = make_simulation(s);
  VerifyReport report;
  report.frames = trace.frames.size();
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const TraceFrame& recorded = trace.frames[i];
    if (recorded.tick != sim.next_tick()) {
      report.first_divergent_tick = std::min(recorded.tick, sim.next_tick());
      report.detail = "trace skips from tick " + std::to_string(sim.next_tick()) + " to " +
                      std::to_string(recorded.tick);
      return report;
    }
    for (const Command& c : recorded.commands_applied) sim.submit(c);
    std::string line;
    try {
      line = encode_frame(capture_frame(sim, sim.advance()));
    } catch (const Error& e) {
      report.first_divergent_tick = recorded.tick;
      report.detail = std::string("re-simulation failed: ") + e.what();
      return report;
    }
    if (line != trace.lines[i]) {
      report.first_divergent_tick = recorded.tick;
      report.detail = "frame content differs";
      return report;
    }
  }
  report.identical = true;
  return report;
}

}  // namespace gridtraffic
