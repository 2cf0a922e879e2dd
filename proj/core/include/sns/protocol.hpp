#pragma once

// Line protocol between the controller and a gantry device.
//
//   host -> device   G0 X<mm> Y<mm> Z<mm> F<mm/min>   queue a move
//                    M280 S<deg>                      set grasper angle
//                    M114                             report pose and contact
//   device -> host   X:<mm> Y:<mm> Z:<mm> A:<deg>
//                    CONTACT:0|1
//                    ok | busy | error: <text>

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sns/gantry.hpp"

namespace sns {

enum class LineKind { Move, Grasper, Query, PositionReport, ContactReport, Ack, Busy, Error };
std::string_view to_string(LineKind kind);

inline constexpr double kDefaultFeed = 6000.0;  // mm/min
inline constexpr std::size_t kMoveBufferDepth = 10;

/// Throw EncodeError on non-finite or out-of-range values.
std::string encode_move(const Vec3& xyz_m, double feed_mm_min = kDefaultFeed);
std::string encode_grasper(double angle_deg);
std::string encode_query();

struct Pose {
  Vec3 xyz = Vec3::Zero();  // m
  double angle = 0.0;       // deg
};

std::string encode_position_report(const Pose& pose);
std::string encode_contact_report(bool contact);

/// Any protocol line, either direction.
struct DeviceLine {
  std::string raw;
  LineKind kind = LineKind::Error;
  Vec3 xyz = Vec3::Zero();  // Move, PositionReport (m)
  double feed = 0.0;        // Move
  double angle = 0.0;       // Grasper, PositionReport (deg)
  bool contact = false;     // ContactReport
};

/// Parses a device -> host line. Unrecognised lines come back with kind
/// Error; a recognised line with a malformed number throws ParseError with
/// the byte offset of the bad field.
DeviceLine parse_report(std::string_view line);

/// Parses a host -> device line, same error contract.
DeviceLine parse_command(std::string_view line);

/// Inverse of the two parsers for canonical lines.
std::string encode_line(const DeviceLine& line);

/// In-memory device backed by the gantry simulator. Moves go through a
/// bounded queue; each simulator step consumes at most one queued move.
class LoopbackDevice {
 public:
  explicit LoopbackDevice(const SimConfig& config, double latency_s = 0.0);

  /// Handles one host line and returns the response lines. A non-zero
  /// latency advances the simulation by that much before answering.
  std::vector<std::string> transact(std::string_view line);

  /// Runs the simulation forward by whole steps covering `seconds`.
  void advance(double seconds);
  /// Exactly one simulator step.
  void step_once();

  const GantryState& state() const { return state_; }
  GantryState& mutable_state() { return state_; }
  std::size_t queued_moves() const { return queue_.size(); }
  double clock() const { return state_.t; }
  long steps() const { return steps_; }

 private:
  SimConfig config_;
  double latency_;
  GantryState state_;
  std::deque<Vec3> queue_;
  MotorCommand target_;
  double pending_ = 0.0;
  long steps_ = 0;
};

}  // namespace sns
