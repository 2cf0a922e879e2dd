#include "sns/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"
#include "sns/error.hpp"

namespace sns {

namespace {

constexpr const char* kCsvHeader = "t,x,y,z,theta,obj_x,obj_y,obj_z,force,subtask";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw InvalidParameter("trace: expected a 3-vector");
  return {v[0], v[1], v[2]};
}

nlohmann::json step_json(const TraceStep& s) {
  nlohmann::json j;
  j["t"] = s.t;
  j["sensors"] = {{"gripper", vec3_json(s.sensors.gripper)},
                  {"object", vec3_json(s.sensors.object)},
                  {"target", vec3_json(s.sensors.target)},
                  {"force", s.sensors.force}};
  j["activities"] = std::vector<double>(s.activities.begin(), s.activities.end());
  j["command"] = {{"xyz", vec3_json(s.command.xyz)}, {"angle", s.command.angle}};
  const GantryState& g = s.state;
  j["state"] = {{"t", g.t},
                {"position", vec3_json(g.position)},
                {"velocity", vec3_json(g.velocity)},
                {"angle", g.angle},
                {"angle_rate", g.angle_rate},
                {"object", vec3_json(g.object)},
                {"grip_offset", vec3_json(g.grip_offset)},
                {"attached", g.attached},
                {"force", g.force},
                {"command_clamped", g.command_clamped}};
  j["subtask"] = s.subtask;
  if (s.subtask == kNoSubtask) {
    j["phase"] = nullptr;
  } else {
    j["phase"] = std::string(to_string(static_cast<SubtaskId>(s.subtask)));
  }
  return j;
}

TraceStep step_from(const nlohmann::json& j) {
  TraceStep s;
  s.t = j.at("t").get<double>();
  const auto& sensors = j.at("sensors");
  s.sensors.gripper = vec3_from(sensors.at("gripper"));
  s.sensors.object = vec3_from(sensors.at("object"));
  s.sensors.target = vec3_from(sensors.at("target"));
  s.sensors.force = sensors.at("force").get<bool>();
  const auto acts = j.at("activities").get<std::vector<double>>();
  if (acts.size() != s.activities.size()) throw InvalidParameter("trace: expected 8 activities");
  std::copy(acts.begin(), acts.end(), s.activities.begin());
  s.command.xyz = vec3_from(j.at("command").at("xyz"));
  s.command.angle = j.at("command").at("angle").get<double>();
  const auto& g = j.at("state");
  s.state.t = g.at("t").get<double>();
  s.state.position = vec3_from(g.at("position"));
  s.state.velocity = vec3_from(g.at("velocity"));
  s.state.angle = g.at("angle").get<double>();
  s.state.angle_rate = g.at("angle_rate").get<double>();
  s.state.object = vec3_from(g.at("object"));
  s.state.grip_offset = vec3_from(g.at("grip_offset"));
  s.state.attached = g.at("attached").get<bool>();
  s.state.force = g.at("force").get<bool>();
  s.state.command_clamped = g.at("command_clamped").get<bool>();
  s.subtask = j.at("subtask").get<int>();
  return s;
}

void fill_summary(EpisodeTrace& trace) {
  EpisodeSummary& s = trace.summary;
  s.steps = static_cast<int>(trace.steps.size());
  s.sequence = collapse_labels(trace.steps);
  s.returned_home = false;
  for (const TraceStep& step : trace.steps) {
    if (step.subtask == kHomeLabel) s.returned_home = true;
  }
  if (!trace.steps.empty()) {
    const TraceStep& last = trace.steps.back();
    s.duration = last.t;
    s.object_error = (last.state.object - last.sensors.target).norm();
  }
}

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw InvalidParameter("trace csv: bad number '" + std::string(field) + "' on line " +
                           std::to_string(line_no));
  }
  return v;
}

}  // namespace

std::string trace_csv(const EpisodeTrace& trace) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const TraceStep& s : trace.steps) {
    const GantryState& g = s.state;
    out += num(s.t) + ',' + num(g.position.x()) + ',' + num(g.position.y()) + ',' +
           num(g.position.z()) + ',' + num(g.angle) + ',' + num(g.object.x()) + ',' +
           num(g.object.y()) + ',' + num(g.object.z()) + ',' + (g.force ? "1" : "0") + ',' +
           std::to_string(s.subtask) + '\n';
  }
  return out;
}

std::string trace_jsonl(const EpisodeTrace& trace) {
  std::string out;
  for (const TraceStep& s : trace.steps) {
    out += step_json(s).dump();
    out += '\n';
  }
  return out;
}

EpisodeTrace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw InvalidParameter("trace csv: missing or unexpected header");
  }
  EpisodeTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 10) {
      throw InvalidParameter("trace csv: expected 10 columns on line " + std::to_string(line_no));
    }
    TraceStep s;
    s.t = parse_double(f[0], line_no);
    s.state.t = s.t;
    for (int a = 0; a < 3; ++a) s.state.position[a] = parse_double(f[1 + a], line_no);
    s.state.angle = parse_double(f[4], line_no);
    for (int a = 0; a < 3; ++a) s.state.object[a] = parse_double(f[5 + a], line_no);
    s.state.force = parse_double(f[8], line_no) != 0.0;
    s.subtask = static_cast<int>(parse_double(f[9], line_no));
    trace.steps.push_back(s);
  }
  fill_summary(trace);
  return trace;
}

EpisodeTrace trace_from_jsonl(const std::string& text) {
  EpisodeTrace trace;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      trace.steps.push_back(step_from(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidParameter("trace jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  fill_summary(trace);
  return trace;
}

std::string summary_json(const EpisodeSummary& s) {
  nlohmann::json j;
  j["success"] = s.success;
  j["object_error_m"] = s.object_error;
  j["gripper_error_m"] = s.gripper_error;
  j["duration_s"] = s.duration;
  j["steps"] = s.steps;
  j["returned_home"] = s.returned_home;
  j["sequence"] = s.sequence;
  auto names = nlohmann::json::array();
  for (int k : s.sequence) names.push_back(std::string(to_string(static_cast<SubtaskId>(k))));
  j["sequence_names"] = std::move(names);
  return j.dump(2);
}

void export_trace(const EpisodeTrace& trace, const std::filesystem::path& csv_path,
                  const std::filesystem::path& jsonl_path) {
  detail::write_text_file(csv_path, trace_csv(trace));
  detail::write_text_file(jsonl_path, trace_jsonl(trace));
}

}  // namespace sns
