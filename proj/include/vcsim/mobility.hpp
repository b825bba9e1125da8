#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcsim/geometry.hpp"

namespace vcsim {

/// Upper bound on vehicle speed in the reference trace (70.1 km/h).
inline constexpr double kDefaultMaxSpeed = 19.5;
inline constexpr double kDefaultCoverageRadius = 255.0;

struct VehicleState {
  std::string vehicle_id;
  double time = 0.0;  // seconds from trace start
  Vec2 position;      // m
  Vec2 velocity;      // m/s
  bool operator==(const VehicleState&) const = default;
};

/// States are kept sorted by (time, vehicle_id).
struct Trace {
  double duration = 0.0;
  std::vector<VehicleState> states;
  Bounds bounds;
  bool operator==(const Trace&) const = default;
};

struct RsuSite {
  std::string rsu_id;
  Vec2 position;
  double coverage_radius = kDefaultCoverageRadius;
  bool operator==(const RsuSite&) const = default;
};

enum class TraceFormat { csv };

struct TraceParseOptions {
  /// Used when the stream carries no `# bounds:` directive. When neither is
  /// present the bounding box of the states is used.
  std::optional<Bounds> bounds;
  double max_speed = kDefaultMaxSpeed;
};

inline constexpr const char* kTraceHeader = "time_s,vehicle_id,x_m,y_m,vx_mps,vy_mps";
inline constexpr const char* kRsuHeader = "rsu_id,x_m,y_m,radius_m";

/// Reads a trace. Throws ParseError on a malformed row, DuplicateStateError
/// on a repeated (vehicle_id, time), BoundsError for a position outside the
/// declared bounds.
Trace parse_trace(std::istream& in, TraceFormat format = TraceFormat::csv,
                  const TraceParseOptions& options = {});

/// Writes a `# bounds:` directive, the header, and one row per state. The
/// output parses back to an identical Trace.
void emit_trace(std::ostream& out, const Trace& trace);

struct SpeedRange {
  double lo = 2.0;
  double hi = 15.0;
};

struct SynthOptions {
  SpeedRange speed;
  /// Chance per second that a vehicle picks a new heading and speed.
  double turn_probability = 0.05;
};

/// Synthetic trace: straight segments with occasional turns, reflected at the
/// region edges, one state per vehicle per whole second on [0, duration].
Trace synth_trace(std::uint64_t seed, std::size_t n_vehicles, double duration, const Bounds& bounds,
                  const SynthOptions& options = {});

/// Nearest RSU whose disc contains `position`; distance ties go to the
/// smallest rsu_id.
std::optional<std::string> covering_rsu(Vec2 position, std::span<const RsuSite> rsus);

std::vector<RsuSite> parse_rsus(std::istream& in);
void emit_rsus(std::ostream& out, std::span<const RsuSite> rsus);

/// Where in each beacon period a vehicle transmits.
struct EmissionPhase {
  double period = 1.0;
  /// If positive, offsets are confined to the first `window` seconds of each
  /// `sync_interval` (the part of the CCH interval a beacon can use).
  double sync_interval = 0.0;
  double window = 0.0;
};

/// Deterministic per-vehicle offset in [0, period).
double emission_offset(const std::string& vehicle_id, const EmissionPhase& phase);

struct ScheduledBeacon {
  std::string vehicle_id;
  std::size_t seq = 0;
  double t_gen = 0.0;
  Vec2 position;
  Vec2 velocity;
  std::optional<std::string> rsu_id;  // empty when uncovered
};

/// All beacons of a trace, ordered by (t_gen, vehicle_id). Each vehicle emits
/// at first_seen + offset + k * period until one period past its last state,
/// so a vehicle sampled once still sends one beacon; the kinematics come from
/// the trace row nearest in time (earlier row on ties).
std::vector<ScheduledBeacon> schedule_beacons(const Trace& trace, std::span<const RsuSite> rsus,
                                              const EmissionPhase& phase = {});

}  // namespace vcsim
