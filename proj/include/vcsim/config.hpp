#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vcsim/error.hpp"
#include "vcsim/simcore.hpp"

namespace vcsim {

/// Problems with the configuration itself (unknown key, bad value, missing
/// input file), as opposed to failures while running.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Flat `key = value` document; '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Applies a `key=value` override.
  void set_assignment(const std::string& assignment);
  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Every recognised configuration key with its default ("" = unset).
const std::map<std::string, std::string>& config_defaults();

struct ScenarioConfig {
  // trace source: file, or synthetic
  std::optional<std::filesystem::path> trace_file;
  std::size_t synth_vehicles = 100;
  double synth_duration = 60.0;
  Bounds bounds{0.0, 0.0, 1500.0, 1000.0};
  double speed_min = 2.0;
  double speed_max = 15.0;
  double turn_probability = 0.05;

  // RSU source: file, or greedy placement over a candidate grid
  std::optional<std::filesystem::path> rsu_file;
  std::size_t rsu_count = 20;
  double rsu_spacing = 125.0;
  double rsu_radius = kDefaultCoverageRadius;

  TopologyKind topology = TopologyKind::star;
  std::size_t n_core = 4;
  std::string controller = "fast";
  std::optional<double> service_latency;
  std::optional<double> rule_timeout;
  double switch_capacity_pps = 0.0;

  // placement: explicit list, or refinement
  std::vector<std::string> placement;
  std::size_t refine_n = 0;
  std::size_t refine_iters = 30;
  bool refine_invert = false;

  bool inject = false;
  std::optional<std::filesystem::path> delay_file;
  MissingDelayPolicy missing_delay = MissingDelayPolicy::strict;
  double max_contention = 0.002;
  double air_loss = 0.0;
  BeaconPhaseMode beacon_phase = BeaconPhaseMode::cch;
  FlowMode flows = FlowMode::per_beacon;

  double deadline = 0.020;
  double d_min = 5.0;
  double window_timeout = 1.0;
  double cost_base = 1.0;
  double cost_per_neighbor = 1.0;
  double seconds_per_cost = 1e-5;
  double drain = 5.0;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";

  /// Validates keys and values; throws UsageError.
  static ScenarioConfig from(const KeyValueConfig& kv);

  /// Loads or synthesizes the trace.
  Trace load_trace() const;
  /// Loads or places the RSUs for `trace`.
  std::vector<RsuSite> load_rsus(const Trace& trace) const;
  /// Full scenario; placement is left empty when refinement is configured.
  Scenario materialize() const;
};

}  // namespace vcsim
