#include "vcsim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <utility>

#include "vcsim/csv.hpp"
#include "vcsim/error.hpp"
#include "vcsim/rng.hpp"

namespace vcsim {
namespace {

constexpr std::string_view kBoundsDirective = "# bounds:";

bool state_less(const VehicleState& a, const VehicleState& b) {
  if (a.time != b.time) return a.time < b.time;
  return a.vehicle_id < b.vehicle_id;
}

Bounds parse_bounds(std::string_view text, std::size_t line) {
  const auto f = csv::split(text);
  if (f.size() != 4) throw ParseError(line, "bounds directive needs min_x,min_y,max_x,max_y");
  Bounds b{csv::to_double(f[0], line, "min_x"), csv::to_double(f[1], line, "min_y"),
           csv::to_double(f[2], line, "max_x"), csv::to_double(f[3], line, "max_y")};
  if (b.max_x < b.min_x || b.max_y < b.min_y) throw ParseError(line, "inverted bounds");
  return b;
}

}  // namespace

Trace parse_trace(std::istream& in, TraceFormat format, const TraceParseOptions& options) {
  if (format != TraceFormat::csv) throw ConfigError("unsupported trace format");
  csv::LineReader reader(in);
  std::optional<Bounds> declared = options.bounds;
  std::string line;
  bool have_header = false;
  while (reader.next(line)) {
    const auto t = csv::trim(line);
    if (t.starts_with(kBoundsDirective)) {
      declared = parse_bounds(t.substr(kBoundsDirective.size()), reader.line_no());
      continue;
    }
    if (t.starts_with("#") || t.empty()) continue;
    if (t != kTraceHeader) throw ParseError(reader.line_no(), "expected header '" + std::string(kTraceHeader) + "'");
    have_header = true;
    break;
  }
  if (!have_header) throw ParseError(reader.line_no() + 1, "missing trace header");

  Trace trace;
  std::set<std::pair<std::string, double>> seen;
  while (reader.next(line)) {
    const auto t = csv::trim(line);
    if (t.empty() || t.starts_with("#")) continue;
    const std::size_t n = reader.line_no();
    const auto f = csv::split(t);
    if (f.size() != 6) throw ParseError(n, "expected 6 fields, got " + std::to_string(f.size()));
    VehicleState s;
    s.time = csv::to_double(f[0], n, "time_s");
    s.vehicle_id = std::string(f[1]);
    s.position = {csv::to_double(f[2], n, "x_m"), csv::to_double(f[3], n, "y_m")};
    s.velocity = {csv::to_double(f[4], n, "vx_mps"), csv::to_double(f[5], n, "vy_mps")};
    if (s.vehicle_id.empty()) throw ParseError(n, "empty vehicle_id");
    if (s.time < 0.0) throw ParseError(n, "negative time");
    if (norm(s.velocity) > options.max_speed) throw ParseError(n, "speed exceeds max_speed");
    if (declared && !declared->contains(s.position)) throw BoundsError(n, "position outside declared bounds");
    if (!seen.emplace(s.vehicle_id, s.time).second) {
      throw DuplicateStateError(n, "duplicate state for vehicle " + s.vehicle_id);
    }
    trace.duration = std::max(trace.duration, s.time);
    trace.states.push_back(std::move(s));
  }
  std::sort(trace.states.begin(), trace.states.end(), state_less);

  if (declared) {
    trace.bounds = *declared;
  } else if (!trace.states.empty()) {
    Bounds b{trace.states[0].position.x, trace.states[0].position.y, trace.states[0].position.x,
             trace.states[0].position.y};
    for (const auto& s : trace.states) {
      b.min_x = std::min(b.min_x, s.position.x);
      b.min_y = std::min(b.min_y, s.position.y);
      b.max_x = std::max(b.max_x, s.position.x);
      b.max_y = std::max(b.max_y, s.position.y);
    }
    trace.bounds = b;
  }
  return trace;
}

void emit_trace(std::ostream& out, const Trace& trace) {
  const Bounds& b = trace.bounds;
  out << kBoundsDirective << ' ' << csv::shortest(b.min_x) << ',' << csv::shortest(b.min_y) << ','
      << csv::shortest(b.max_x) << ',' << csv::shortest(b.max_y) << '\n';
  out << kTraceHeader << '\n';
  for (const auto& s : trace.states) {
    out << csv::shortest(s.time) << ',' << s.vehicle_id << ',' << csv::shortest(s.position.x) << ','
        << csv::shortest(s.position.y) << ',' << csv::shortest(s.velocity.x) << ','
        << csv::shortest(s.velocity.y) << '\n';
  }
}

Trace synth_trace(std::uint64_t seed, std::size_t n_vehicles, double duration, const Bounds& bounds,
                  const SynthOptions& options) {
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
    throw ConfigError("synthetic trace bounds must have positive area");
  }
  if (!(duration >= 0.0)) throw ConfigError("duration must be non-negative");
  if (options.speed.lo < 0.0 || options.speed.hi < options.speed.lo) {
    throw ConfigError("speed range must satisfy 0 <= lo <= hi");
  }

  Rng rng = Rng::stream(seed, "trace");
  const auto steps = static_cast<std::size_t>(std::floor(duration));
  Trace trace;
  trace.bounds = bounds;
  trace.duration = static_cast<double>(steps);
  trace.states.reserve(n_vehicles * (steps + 1));

  auto random_velocity = [&] {
    const double heading = rng.uniform() * 2.0 * std::numbers::pi;
    const double speed = rng.uniform(options.speed.lo, options.speed.hi);
    return Vec2{speed * std::cos(heading), speed * std::sin(heading)};
  };

  for (std::size_t i = 0; i < n_vehicles; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "v%05zu", i);
    Vec2 pos{rng.uniform(bounds.min_x, bounds.max_x), rng.uniform(bounds.min_y, bounds.max_y)};
    Vec2 vel = random_velocity();
    for (std::size_t t = 0; t <= steps; ++t) {
      if (t > 0 && rng.bernoulli(options.turn_probability)) vel = random_velocity();
      // The velocity stored with a state is the one used over the next second,
      // so reflect it now if it would leave the region.
      if (pos.x + vel.x < bounds.min_x || pos.x + vel.x > bounds.max_x) vel.x = -vel.x;
      if (pos.y + vel.y < bounds.min_y || pos.y + vel.y > bounds.max_y) vel.y = -vel.y;
      trace.states.push_back({id, static_cast<double>(t), pos, vel});
      pos = pos + vel;
      pos.x = std::clamp(pos.x, bounds.min_x, bounds.max_x);
      pos.y = std::clamp(pos.y, bounds.min_y, bounds.max_y);
    }
  }
  std::sort(trace.states.begin(), trace.states.end(), state_less);
  return trace;
}

std::optional<std::string> covering_rsu(Vec2 position, std::span<const RsuSite> rsus) {
  const RsuSite* best = nullptr;
  double best_d = 0.0;
  for (const auto& r : rsus) {
    const double d = distance(position, r.position);
    if (d > r.coverage_radius) continue;
    if (!best || d < best_d || (d == best_d && r.rsu_id < best->rsu_id)) {
      best = &r;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return best->rsu_id;
}

std::vector<RsuSite> parse_rsus(std::istream& in) {
  csv::LineReader reader(in);
  csv::expect_header(reader, kRsuHeader);
  std::vector<RsuSite> out;
  std::set<std::string> ids;
  std::string line;
  while (reader.next(line)) {
    const auto t = csv::trim(line);
    if (t.empty() || t.starts_with("#")) continue;
    const std::size_t n = reader.line_no();
    const auto f = csv::split(t);
    if (f.size() != 4) throw ParseError(n, "expected 4 fields, got " + std::to_string(f.size()));
    RsuSite r{std::string(f[0]),
              {csv::to_double(f[1], n, "x_m"), csv::to_double(f[2], n, "y_m")},
              csv::to_double(f[3], n, "radius_m")};
    if (r.rsu_id.empty()) throw ParseError(n, "empty rsu_id");
    if (!(r.coverage_radius > 0.0)) throw ParseError(n, "radius must be positive");
    if (!ids.insert(r.rsu_id).second) throw ParseError(n, "duplicate rsu_id " + r.rsu_id);
    out.push_back(std::move(r));
  }
  return out;
}

void emit_rsus(std::ostream& out, std::span<const RsuSite> rsus) {
  out << kRsuHeader << '\n';
  for (const auto& r : rsus) {
    out << r.rsu_id << ',' << csv::shortest(r.position.x) << ',' << csv::shortest(r.position.y) << ','
        << csv::shortest(r.coverage_radius) << '\n';
  }
}

double emission_offset(const std::string& vehicle_id, const EmissionPhase& phase) {
  const double u = hash_unit(vehicle_id);
  if (phase.sync_interval > 0.0 && phase.window > 0.0) {
    const auto slots = std::max<long>(1, std::lround(std::floor(phase.period / phase.sync_interval)));
    const auto slot = std::min<long>(slots - 1, static_cast<long>(u * static_cast<double>(slots)));
    const double within = hash_unit(vehicle_id + "#phase") * phase.window;
    return static_cast<double>(slot) * phase.sync_interval + within;
  }
  return u * phase.period;
}

std::vector<ScheduledBeacon> schedule_beacons(const Trace& trace, std::span<const RsuSite> rsus,
                                              const EmissionPhase& phase) {
  std::map<std::string, std::vector<const VehicleState*>> per_vehicle;
  for (const auto& s : trace.states) per_vehicle[s.vehicle_id].push_back(&s);

  std::vector<ScheduledBeacon> out;
  for (const auto& [id, states] : per_vehicle) {
    const double first = states.front()->time;
    const double last = states.back()->time;
    const double offset = emission_offset(id, phase);
    for (std::size_t k = 0;; ++k) {
      const double t = first + offset + static_cast<double>(k) * phase.period;
      if (t >= last + phase.period) break;
      // Nearest row in time, earlier row on ties.
      auto it = std::lower_bound(states.begin(), states.end(), t,
                                 [](const VehicleState* s, double v) { return s->time < v; });
      if (it == states.end()) {
        --it;
      } else if (it != states.begin() && t - (*std::prev(it))->time <= (*it)->time - t) {
        --it;
      }
      const VehicleState& s = **it;
      out.push_back({id, k, t, s.position, s.velocity, covering_rsu(s.position, rsus)});
    }
  }
  std::sort(out.begin(), out.end(), [](const ScheduledBeacon& a, const ScheduledBeacon& b) {
    if (a.t_gen != b.t_gen) return a.t_gen < b.t_gen;
    return a.vehicle_id < b.vehicle_id;
  });
  return out;
}

}  // namespace vcsim
