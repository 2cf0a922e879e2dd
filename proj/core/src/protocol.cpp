#include "sns/protocol.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "sns/error.hpp"

namespace sns {

std::string_view to_string(LineKind kind) {
  switch (kind) {
    case LineKind::Move:
      return "move";
    case LineKind::Grasper:
      return "grasper";
    case LineKind::Query:
      return "query";
    case LineKind::PositionReport:
      return "position_report";
    case LineKind::ContactReport:
      return "contact_report";
    case LineKind::Ack:
      return "ack";
    case LineKind::Busy:
      return "busy";
    case LineKind::Error:
      return "error";
  }
  return "?";
}

namespace {

constexpr double kMaxMm = 1e5;

// Fixed-point text with `decimals` places; never prints "-0.000".
std::string fixed(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  double rounded = std::round(value * scale) / scale;
  if (rounded == 0.0) rounded = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

void check_mm(double mm, const char* axis) {
  if (!std::isfinite(mm) || std::abs(mm) > kMaxMm) {
    throw EncodeError(std::string("encode_move: ") + axis + " is not a finite in-range value");
  }
}

std::string_view trim_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Reads `prefix` then a number at `pos`; advances pos past the number.
double field(std::string_view line, std::size_t& pos, std::string_view prefix) {
  if (line.substr(pos, prefix.size()) != prefix) {
    throw ParseError("expected '" + std::string(prefix) + "'", pos);
  }
  pos += prefix.size();
  const char* first = line.data() + pos;
  const char* last = line.data() + line.size();
  double value = 0.0;
  const auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || end == first || !std::isfinite(value)) {
    throw ParseError("malformed number", pos);
  }
  pos = static_cast<std::size_t>(end - line.data());
  return value;
}

void expect_end(std::string_view line, std::size_t pos) {
  if (pos != line.size()) throw ParseError("unexpected trailing characters", pos);
}

}  // namespace

std::string encode_move(const Vec3& xyz_m, double feed) {
  const Vec3 mm = xyz_m * 1000.0;
  check_mm(mm.x(), "X");
  check_mm(mm.y(), "Y");
  check_mm(mm.z(), "Z");
  if (!std::isfinite(feed) || feed <= 0.0 || feed > 1e6) {
    throw EncodeError("encode_move: feed must lie in (0, 1e6] mm/min");
  }
  return "G0 X" + fixed(mm.x(), 3) + " Y" + fixed(mm.y(), 3) + " Z" + fixed(mm.z(), 3) +
         " F" + fixed(feed, 0);
}

std::string encode_grasper(double angle) {
  if (!std::isfinite(angle) || angle < 0.0 || angle > 180.0) {
    throw EncodeError("encode_grasper: angle must lie in [0, 180] deg");
  }
  return "M280 S" + fixed(angle, 1);
}

std::string encode_query() { return "M114"; }

std::string encode_position_report(const Pose& pose) {
  const Vec3 mm = pose.xyz * 1000.0;
  if (!mm.allFinite() || !std::isfinite(pose.angle)) {
    throw EncodeError("position report: non-finite value");
  }
  return "X:" + fixed(mm.x(), 3) + " Y:" + fixed(mm.y(), 3) + " Z:" + fixed(mm.z(), 3) +
         " A:" + fixed(pose.angle, 1);
}

std::string encode_contact_report(bool contact) {
  return contact ? "CONTACT:1" : "CONTACT:0";
}

DeviceLine parse_report(std::string_view raw) {
  const std::string_view line = trim_eol(raw);
  DeviceLine out;
  out.raw = std::string(line);
  if (line == "ok") {
    out.kind = LineKind::Ack;
  } else if (line == "busy") {
    out.kind = LineKind::Busy;
  } else if (starts_with(line, "CONTACT:")) {
    const std::string_view v = line.substr(8);
    if (v != "0" && v != "1") throw ParseError("contact flag must be 0 or 1", 8);
    out.kind = LineKind::ContactReport;
    out.contact = v == "1";
  } else if (starts_with(line, "X:")) {
    std::size_t pos = 0;
    Vec3 mm;
    mm.x() = field(line, pos, "X:");
    mm.y() = field(line, pos, " Y:");
    mm.z() = field(line, pos, " Z:");
    out.angle = field(line, pos, " A:");
    expect_end(line, pos);
    out.kind = LineKind::PositionReport;
    out.xyz = mm / 1000.0;
  } else {
    out.kind = LineKind::Error;
  }
  return out;
}

DeviceLine parse_command(std::string_view raw) {
  const std::string_view line = trim_eol(raw);
  DeviceLine out;
  out.raw = std::string(line);
  if (line == "M114") {
    out.kind = LineKind::Query;
  } else if (starts_with(line, "M280 ")) {
    std::size_t pos = 4;
    out.angle = field(line, pos, " S");
    expect_end(line, pos);
    out.kind = LineKind::Grasper;
  } else if (starts_with(line, "G0 ")) {
    std::size_t pos = 2;
    Vec3 mm;
    mm.x() = field(line, pos, " X");
    mm.y() = field(line, pos, " Y");
    mm.z() = field(line, pos, " Z");
    out.feed = field(line, pos, " F");
    expect_end(line, pos);
    out.kind = LineKind::Move;
    out.xyz = mm / 1000.0;
  } else {
    out.kind = LineKind::Error;
  }
  return out;
}

std::string encode_line(const DeviceLine& line) {
  switch (line.kind) {
    case LineKind::Move:
      return encode_move(line.xyz, line.feed);
    case LineKind::Grasper:
      return encode_grasper(line.angle);
    case LineKind::Query:
      return encode_query();
    case LineKind::PositionReport:
      return encode_position_report({line.xyz, line.angle});
    case LineKind::ContactReport:
      return encode_contact_report(line.contact);
    case LineKind::Ack:
      return "ok";
    case LineKind::Busy:
      return "busy";
    case LineKind::Error:
      return line.raw;
  }
  return line.raw;
}

LoopbackDevice::LoopbackDevice(const SimConfig& config, double latency_s)
    : config_(config), latency_(latency_s), state_(GantryState::initial(config)) {
  if (!(latency_s >= 0.0) || !std::isfinite(latency_s)) {
    throw InvalidParameter("loopback device: latency must be >= 0");
  }
  target_.xyz = state_.position;
  target_.angle = state_.angle;
}

std::vector<std::string> LoopbackDevice::transact(std::string_view line) {
  if (latency_ > 0.0) advance(latency_);
  DeviceLine cmd;
  try {
    cmd = parse_command(line);
  } catch (const ParseError& e) {
    return {"error: " + std::string(e.what()) + " at byte " + std::to_string(e.offset())};
  }
  switch (cmd.kind) {
    case LineKind::Move:
      if (queue_.size() >= kMoveBufferDepth) return {"busy"};
      queue_.push_back(cmd.xyz);
      return {"ok"};
    case LineKind::Grasper:
      target_.angle = cmd.angle;
      return {"ok"};
    case LineKind::Query:
      return {encode_position_report({state_.position, state_.angle}),
              encode_contact_report(state_.force), "ok"};
    default:
      return {"error: unknown command"};
  }
}

void LoopbackDevice::step_once() {
  if (!queue_.empty()) {
    target_.xyz = queue_.front();
    queue_.pop_front();
  }
  state_ = sim_step(state_, target_, config_);
  ++steps_;
}

void LoopbackDevice::advance(double seconds) {
  if (!(seconds >= 0.0)) throw InvalidParameter("loopback device: cannot advance backwards");
  pending_ += seconds;
  while (pending_ >= config_.dt * (1.0 - 1e-9)) {
    step_once();
    pending_ -= config_.dt;
  }
  if (pending_ < 0.0) pending_ = 0.0;
}

}  // namespace sns
