#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vcsim/backhaul.hpp"
#include "vcsim/collision.hpp"
#include "vcsim/mobility.hpp"
#include "vcsim/radio.hpp"

namespace vcsim {

enum class Outcome { success, late, lost, uncovered };

const char* to_string(Outcome o);
Outcome parse_outcome(const std::string& s);

/// success iff replied within the deadline, late iff replied after it, lost
/// iff never replied.
Outcome classify(double total, bool replied, double deadline);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Per-beacon outcome. Delay components of legs that never happened are NaN.
struct BeaconRecord {
  std::string vehicle_id;
  std::size_t seq = 0;
  std::string rsu_id;       // empty when uncovered
  std::string detector_id;  // empty when none
  double d_air_up = kNaN;
  double d_up = kNaN;
  double d_proc = kNaN;  // queueing at the detector plus service
  double d_down = kNaN;
  double d_air_down = kNaN;
  double total = kNaN;
  Outcome outcome = Outcome::lost;
  std::size_t alerts = 0;
  bool processed = false;  // reached and was served by a detector
  std::size_t detours = 0;  // controller detours, both directions

  bool replied() const { return outcome == Outcome::success || outcome == Outcome::late; }
};

struct EnergyParams {
  double rsu_cost_per_packet = 0.5;    // send a beacon or receive a reply
  double controller_cost_per_detour = 2.0;
  double overhead_per_second = 100.0;  // emulation platform baseline
};

/// Accumulated CPU-cost units per entity.
struct EnergyAccount {
  std::map<std::string, double> detector;
  std::map<std::string, double> rsu_host;
  double controller = 0.0;
  double overhead = 0.0;
  std::size_t controller_detours = 0;
  double controller_cost_per_detour = 0.0;

  double total() const;
};

enum class BeaconPhaseMode {
  cch,      // offsets fall inside the CCH part of a sync interval
  uniform,  // offsets uniform over the beacon period
};

enum class FlowMode {
  per_beacon,   // each beacon is a fresh flow (new socket, no persistent connection)
  per_vehicle,  // one flow per pseudonym
};

struct Scenario {
  Trace trace;
  std::vector<RsuSite> rsus;
  TopologyKind topology = TopologyKind::star;
  std::size_t n_core = 4;
  LinkParams link;
  std::string controller_profile = "fast";
  ControllerModel controller = ControllerModel::fast();
  double switch_capacity_pps = 0.0;  // 0 = unlimited
  std::vector<std::string> placement;  // switch ids hosting a detector
  DetectorParams detector;
  WaveParams wave;
  std::optional<DelayFile> injected_delays;
  MissingDelayPolicy missing_delay = MissingDelayPolicy::strict;
  BeaconPhaseMode phase = BeaconPhaseMode::cch;
  FlowMode flows = FlowMode::per_beacon;
  double deadline = 0.020;
  /// Replies still outstanding this long after the last beacon count as lost.
  double drain = 5.0;
  double packet_bits = 2400.0;
  EnergyParams energy;
  std::uint64_t seed = 1;
};

struct ComponentStats {
  double mean = 0.0;
  std::vector<double> samples;  // sorted, for CDFs
};

struct DetectorSummary {
  std::string id;
  std::size_t beacons = 0;
  std::size_t watched = 0;
  double cost = 0.0;
};

struct MetricsSummary {
  std::size_t generated = 0;
  std::size_t success = 0;
  std::size_t late = 0;
  std::size_t lost = 0;
  std::size_t uncovered = 0;
  std::map<std::string, ComponentStats> components;  // d_air_up ... total
  std::vector<DetectorSummary> detectors;
  std::size_t controller_detours = 0;
  double controller_cost = 0.0;
  double rsu_cost = 0.0;
  double overhead_cost = 0.0;
  double detector_cost = 0.0;

  std::size_t covered() const { return success + late + lost; }
  double success_fraction() const;
};

/// Names of the delay components in report order.
const std::vector<std::string>& component_names();

MetricsSummary summarize(const std::vector<BeaconRecord>& records, const EnergyAccount& energy);

struct RunResult {
  std::vector<BeaconRecord> records;
  EnergyAccount energy;
  MetricsSummary summary;
};

/// Detector serving each RSU: the one with least path latency from the RSU
/// switch, ties to the smallest detector id.
std::map<std::string, std::string> assign_detectors(const Router& router, const std::vector<std::string>& placement);

/// One deterministic simulation of the whole beacon lifecycle.
RunResult run(const Scenario& scenario);
/// Same, on an already built topology.
RunResult run(const Scenario& scenario, const TopologyGraph& topology);

inline constexpr const char* kRecordsHeader =
    "vehicle_id,seq,rsu_id,detector_id,d_air_up_s,d_up_s,d_proc_s,d_down_s,d_air_down_s,total_s,outcome,alerts";

void write_records_csv(std::ostream& out, const std::vector<BeaconRecord>& records);
std::vector<BeaconRecord> read_records_csv(std::istream& in);

struct SummaryLabels {
  std::size_t n_detectors = 0;
  std::string topology;
  std::string controller;
  std::uint64_t seed = 0;
};

/// Summary JSON document. `include_cdf` adds the sorted per-component samples.
std::string summary_json(const MetricsSummary& summary, const SummaryLabels& labels, bool include_cdf = true);

}  // namespace vcsim
