#include "vcsim/simcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include <json.hpp>

#include "vcsim/csv.hpp"
#include "vcsim/error.hpp"

namespace vcsim {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::late: return "late";
    case Outcome::lost: return "lost";
    case Outcome::uncovered: return "uncovered";
  }
  return "?";
}

Outcome parse_outcome(const std::string& s) {
  if (s == "success") return Outcome::success;
  if (s == "late") return Outcome::late;
  if (s == "lost") return Outcome::lost;
  if (s == "uncovered") return Outcome::uncovered;
  throw ConfigError("unknown outcome '" + s + "'");
}

Outcome classify(double total, bool replied, double deadline) {
  if (!replied) return Outcome::lost;
  return total <= deadline ? Outcome::success : Outcome::late;
}

double EnergyAccount::total() const {
  double t = controller + overhead;
  for (const auto& [_, c] : detector) t += c;
  for (const auto& [_, c] : rsu_host) t += c;
  return t;
}

double MetricsSummary::success_fraction() const {
  const std::size_t c = covered();
  return c == 0 ? 1.0 : static_cast<double>(success) / static_cast<double>(c);
}

const std::vector<std::string>& component_names() {
  static const std::vector<std::string> names{"d_air_up", "d_up", "d_proc", "d_down", "d_air_down", "total"};
  return names;
}

namespace {

std::array<double, 6> components_of(const BeaconRecord& r) {
  return {r.d_air_up, r.d_up, r.d_proc, r.d_down, r.d_air_down, r.total};
}

}  // namespace

MetricsSummary summarize(const std::vector<BeaconRecord>& records, const EnergyAccount& energy) {
  MetricsSummary s;
  s.generated = records.size();
  const auto& names = component_names();
  std::vector<std::vector<double>> samples(names.size());
  std::map<std::string, DetectorSummary> per_detector;
  std::map<std::string, std::set<std::string>> watched;
  for (const auto& [id, cost] : energy.detector) per_detector[id] = {id, 0, 0, cost};

  for (const auto& r : records) {
    switch (r.outcome) {
      case Outcome::success: ++s.success; break;
      case Outcome::late: ++s.late; break;
      case Outcome::lost: ++s.lost; break;
      case Outcome::uncovered: ++s.uncovered; break;
    }
    if (r.replied()) {
      const auto c = components_of(r);
      for (std::size_t i = 0; i < c.size(); ++i) samples[i].push_back(c[i]);
    }
    if (r.processed) {
      auto& d = per_detector[r.detector_id];
      d.id = r.detector_id;
      ++d.beacons;
      watched[r.detector_id].insert(r.vehicle_id);
    }
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    ComponentStats st;
    st.samples = std::move(samples[i]);
    // Mean in record order, before sorting, so independent recomputations
    // over the records file agree to the last bit where possible.
    if (!st.samples.empty()) {
      st.mean = std::accumulate(st.samples.begin(), st.samples.end(), 0.0) / static_cast<double>(st.samples.size());
    }
    std::sort(st.samples.begin(), st.samples.end());
    s.components.emplace(names[i], std::move(st));
  }
  for (auto& [id, d] : per_detector) {
    d.watched = watched[id].size();
    s.detector_cost += d.cost;
    s.detectors.push_back(d);
  }
  s.controller_detours = energy.controller_detours;
  s.controller_cost = static_cast<double>(energy.controller_detours) * energy.controller_cost_per_detour;
  for (const auto& [_, c] : energy.rsu_host) s.rsu_cost += c;
  s.overhead_cost = energy.overhead;
  return s;
}

std::map<std::string, std::string> assign_detectors(const Router& router, const std::vector<std::string>& placement) {
  const TopologyGraph& g = router.graph();
  std::vector<std::size_t> dets;
  for (const auto& id : placement) dets.push_back(g.index_of(id));
  std::sort(dets.begin(), dets.end(), [&](std::size_t a, std::size_t b) { return g.node(a).id < g.node(b).id; });
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.node(i).kind != NodeKind::rsu) continue;
    std::size_t best = dets.front();
    for (std::size_t d : dets) {
      if (router.latency(i, d) < router.latency(i, best)) best = d;
    }
    out[g.node(i).id] = g.node(best).id;
  }
  return out;
}

namespace {

enum class EventKind { beacon_gen, rsu_ingress, detector_arrival, detector_done, reply_at_rsu, reply_at_vehicle };

struct SimEvent {
  double fire_time;
  std::uint64_t sequence;
  EventKind kind;
  std::size_t beacon;
};

struct Later {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
    return a.sequence > b.sequence;
  }
};

struct DetectorSlot {
  explicit DetectorSlot(const DetectorParams& p) : detector(p) {}
  Detector detector;
  std::deque<std::size_t> queue;
  bool busy = false;
};

struct InFlight {
  double t_ingress = 0.0;
  double t_det_arrival = 0.0;
  double t_reply_rsu = 0.0;
  std::string flow_host;
};

class Engine {
 public:
  Engine(const Scenario& sc, const TopologyGraph& topo)
      : sc_(sc),
        topo_(topo),
        router_(topo),
        tables_(topo.size()),
        load_(topo.size(), sc.switch_capacity_pps),
        radio_rng_(Rng::stream(sc.seed, "radio")),
        controller_rng_(Rng::stream(sc.seed, "controller")) {
    sc.controller.validate();
    sc.detector.validate();
    sc.wave.validate();
    if (sc.placement.empty()) throw ConfigError("placement must name at least one detector switch");
    std::set<std::string> unique;
    for (const auto& id : sc.placement) {
      if (!topo.find(id)) throw ConfigError("placement references unknown switch '" + id + "'");
      if (!unique.insert(id).second) throw ConfigError("placement lists switch '" + id + "' twice");
    }
    for (const auto& r : sc.rsus) {
      if (!topo.find(r.rsu_id)) throw ConfigError("topology has no switch for RSU '" + r.rsu_id + "'");
    }
    if (sc.injected_delays) {
      radio_ = RadioLink(sc.wave, *sc.injected_delays, sc.missing_delay);
    } else {
      radio_ = RadioLink(sc.wave);
    }
    for (const auto& id : sc.placement) detectors_.emplace(id, DetectorSlot(sc.detector));
    serving_ = assign_detectors(router_, sc.placement);
    for (const auto& id : sc.placement) energy_.detector[id] = 0.0;
    for (const auto& r : sc.rsus) energy_.rsu_host[r.rsu_id] = 0.0;
    energy_.controller_cost_per_detour = sc.energy.controller_cost_per_detour;
  }

  RunResult run() {
    EmissionPhase phase;
    if (sc_.phase == BeaconPhaseMode::cch) {
      phase.sync_interval = sc_.wave.sync_interval;
      phase.window = sc_.wave.cch_duration - sc_.wave.tx_time();
    }
    beacons_ = schedule_beacons(sc_.trace, sc_.rsus, phase);
    records_.resize(beacons_.size());
    flight_.resize(beacons_.size());
    double last_gen = 0.0;
    for (std::size_t i = 0; i < beacons_.size(); ++i) {
      const auto& b = beacons_[i];
      auto& r = records_[i];
      r.vehicle_id = b.vehicle_id;
      r.seq = b.seq;
      r.rsu_id = b.rsu_id.value_or("");
      last_gen = std::max(last_gen, b.t_gen);
      push(b.t_gen, EventKind::beacon_gen, i);
    }
    const double horizon = beacons_.empty() ? 0.0 : last_gen + sc_.drain;

    while (!events_.empty()) {
      const SimEvent ev = events_.top();
      if (ev.fire_time > horizon) break;
      events_.pop();
      dispatch(ev);
    }
    // Whatever is still in flight never got its reply.
    for (auto& r : records_) {
      if (r.outcome == Outcome::lost) r.total = kNaN;
    }

    energy_.overhead = sc_.energy.overhead_per_second * horizon;
    energy_.controller = static_cast<double>(energy_.controller_detours) * sc_.energy.controller_cost_per_detour;
    RunResult out;
    out.summary = summarize(records_, energy_);
    out.records = std::move(records_);
    out.energy = std::move(energy_);
    return out;
  }

 private:
  void push(double t, EventKind kind, std::size_t beacon) { events_.push({t, next_seq_++, kind, beacon}); }

  std::string detector_host(const std::string& sw) const { return "det@" + sw; }

  void dispatch(const SimEvent& ev) {
    const std::size_t i = ev.beacon;
    const double t = ev.fire_time;
    auto& r = records_[i];
    auto& f = flight_[i];
    const auto& b = beacons_[i];
    switch (ev.kind) {
      case EventKind::beacon_gen: {
        if (!b.rsu_id) {
          r.outcome = Outcome::uncovered;
          return;
        }
        r.detector_id = serving_.at(*b.rsu_id);
        r.d_air_up = radio_->uplink(b.vehicle_id, b.seq, b.t_gen, radio_rng_);
        if (radio_->lost(radio_rng_)) return;
        push(t + r.d_air_up, EventKind::rsu_ingress, i);
        return;
      }
      case EventKind::rsu_ingress: {
        energy_.rsu_host[r.rsu_id] += sc_.energy.rsu_cost_per_packet;
        f.t_ingress = t;
        f.flow_host = sc_.flows == FlowMode::per_beacon ? b.vehicle_id + ":" + std::to_string(b.seq) : b.vehicle_id;
        Packet p{{f.flow_host, r.rsu_id}, {detector_host(r.detector_id), r.detector_id}, sc_.packet_bits};
        const auto fr = forward(p, router_, tables_, sc_.controller, t, &controller_rng_, &load_);
        r.detours += fr.controller_detours;
        energy_.controller_detours += fr.controller_detours;
        if (fr.dropped) return;
        r.d_up = fr.arrival_time - t;
        push(fr.arrival_time, EventKind::detector_arrival, i);
        return;
      }
      case EventKind::detector_arrival: {
        f.t_det_arrival = t;
        auto& slot = detectors_.at(r.detector_id);
        slot.queue.push_back(i);
        if (!slot.busy) start_service(r.detector_id, t);
        return;
      }
      case EventKind::detector_done: {
        r.d_proc = t - f.t_det_arrival;
        Packet p{{detector_host(r.detector_id), r.detector_id}, {f.flow_host, r.rsu_id}, sc_.packet_bits};
        const auto fr = forward(p, router_, tables_, sc_.controller, t, &controller_rng_, &load_);
        r.detours += fr.controller_detours;
        energy_.controller_detours += fr.controller_detours;
        if (!fr.dropped) {
          r.d_down = fr.arrival_time - t;
          push(fr.arrival_time, EventKind::reply_at_rsu, i);
        }
        auto& slot = detectors_.at(r.detector_id);
        slot.busy = false;
        if (!slot.queue.empty()) start_service(r.detector_id, t);
        return;
      }
      case EventKind::reply_at_rsu: {
        f.t_reply_rsu = t;
        energy_.rsu_host[r.rsu_id] += sc_.energy.rsu_cost_per_packet;
        r.d_air_down = radio_->downlink(t, radio_rng_);
        if (radio_->lost(radio_rng_)) return;
        push(t + r.d_air_down, EventKind::reply_at_vehicle, i);
        return;
      }
      case EventKind::reply_at_vehicle: {
        r.total = r.d_air_up + r.d_up + r.d_proc + r.d_down + r.d_air_down;
        r.outcome = classify(r.total, true, sc_.deadline);
        return;
      }
    }
  }

  void start_service(const std::string& det_id, double t) {
    auto& slot = detectors_.at(det_id);
    const std::size_t i = slot.queue.front();
    slot.queue.pop_front();
    slot.busy = true;
    const auto& b = beacons_[i];
    const Beacon beacon{b.vehicle_id, b.position, b.velocity, b.t_gen};
    const auto outcome = slot.detector.process(beacon, t);
    records_[i].processed = true;
    records_[i].alerts = outcome.alerts;
    energy_.detector[det_id] += outcome.cost;
    push(t + outcome.service_time, EventKind::detector_done, i);
  }

  const Scenario& sc_;
  const TopologyGraph& topo_;
  Router router_;
  RuleTables tables_;
  SwitchLoad load_;
  std::optional<RadioLink> radio_;
  Rng radio_rng_;
  Rng controller_rng_;
  std::map<std::string, DetectorSlot> detectors_;
  std::map<std::string, std::string> serving_;
  std::vector<ScheduledBeacon> beacons_;
  std::vector<BeaconRecord> records_;
  std::vector<InFlight> flight_;
  EnergyAccount energy_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> events_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace

RunResult run(const Scenario& scenario, const TopologyGraph& topology) { return Engine(scenario, topology).run(); }

RunResult run(const Scenario& scenario) {
  const TopologyGraph topo = build_topology(scenario.rsus, scenario.n_core, scenario.topology, scenario.link);
  return run(scenario, topo);
}

// ---------------------------------------------------------------------------
// Records CSV and summary JSON

namespace {

std::string time_field(double v) { return std::isnan(v) ? std::string() : csv::fixed(v, 12); }

double time_value(std::string_view s, std::size_t line, std::string_view field) {
  return s.empty() ? kNaN : csv::to_double(s, line, field);
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<BeaconRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.vehicle_id << ',' << r.seq << ',' << r.rsu_id << ',' << r.detector_id << ',' << time_field(r.d_air_up)
        << ',' << time_field(r.d_up) << ',' << time_field(r.d_proc) << ',' << time_field(r.d_down) << ','
        << time_field(r.d_air_down) << ',' << time_field(r.total) << ',' << to_string(r.outcome) << ',' << r.alerts
        << '\n';
  }
}

std::vector<BeaconRecord> read_records_csv(std::istream& in) {
  csv::LineReader reader(in);
  csv::expect_header(reader, kRecordsHeader);
  std::vector<BeaconRecord> out;
  std::string line;
  while (reader.next(line)) {
    if (csv::trim(line).empty()) continue;
    const std::size_t n = reader.line_no();
    const auto f = csv::split(line);
    if (f.size() != 12) throw ParseError(n, "expected 12 fields, got " + std::to_string(f.size()));
    BeaconRecord r;
    r.vehicle_id = std::string(f[0]);
    r.seq = static_cast<std::size_t>(csv::to_int(f[1], n, "seq"));
    r.rsu_id = std::string(f[2]);
    r.detector_id = std::string(f[3]);
    r.d_air_up = time_value(f[4], n, "d_air_up_s");
    r.d_up = time_value(f[5], n, "d_up_s");
    r.d_proc = time_value(f[6], n, "d_proc_s");
    r.d_down = time_value(f[7], n, "d_down_s");
    r.d_air_down = time_value(f[8], n, "d_air_down_s");
    r.total = time_value(f[9], n, "total_s");
    try {
      r.outcome = parse_outcome(std::string(f[10]));
    } catch (const ConfigError& e) {
      throw ParseError(n, e.what());
    }
    r.alerts = static_cast<std::size_t>(csv::to_int(f[11], n, "alerts"));
    r.processed = !std::isnan(r.d_proc);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

// Times are written with 12 fixed fractional digits. nlohmann only knows the
// shortest form, so they go in as marker strings and are substituted after dump.
class TimeFields {
 public:
  std::string mark(double v) {
    values_.push_back(v);
    return std::string(1, '\x01') + std::to_string(values_.size() - 1);
  }

  std::string substitute(const std::string& text) const {
    static constexpr std::string_view open = "\"\\u0001";
    std::string out;
    out.reserve(text.size() + 8 * values_.size());
    std::size_t pos = 0;
    while (true) {
      const std::size_t at = text.find(open, pos);
      if (at == std::string::npos) break;
      const std::size_t close = text.find('"', at + open.size());
      const double v = values_.at(std::stoul(text.substr(at + open.size(), close - at - open.size())));
      out.append(text, pos, at - pos);
      out += std::isfinite(v) ? csv::fixed(v, 12) : "null";
      pos = close + 1;
    }
    out.append(text, pos);
    return out;
  }

 private:
  std::vector<double> values_;
};

}  // namespace

std::string summary_json(const MetricsSummary& s, const SummaryLabels& labels, bool include_cdf) {
  TimeFields times;
  nlohmann::ordered_json doc;
  doc["n_detectors"] = labels.n_detectors;
  doc["topology"] = labels.topology;
  doc["controller"] = labels.controller;
  doc["seed"] = labels.seed;
  doc["counts"] = {{"generated", s.generated},
                   {"success", s.success},
                   {"late", s.late},
                   {"lost", s.lost},
                   {"uncovered", s.uncovered}};
  doc["success_fraction"] = s.success_fraction();
  nlohmann::ordered_json means = nlohmann::ordered_json::object();
  for (const auto& name : component_names()) means[name + "_s"] = times.mark(s.components.at(name).mean);
  doc["mean_delay"] = means;
  doc["detectors"] = nlohmann::ordered_json::array();
  for (const auto& d : s.detectors) {
    doc["detectors"].push_back({{"id", d.id}, {"beacons", d.beacons}, {"watched_vehicles", d.watched}, {"cost", d.cost}});
  }
  doc["energy"] = {{"detector", s.detector_cost},
                   {"rsu_host", s.rsu_cost},
                   {"controller", s.controller_cost},
                   {"overhead", s.overhead_cost},
                   {"controller_detours", s.controller_detours}};
  if (include_cdf) {
    nlohmann::ordered_json cdf = nlohmann::ordered_json::object();
    for (const auto& name : component_names()) {
      auto& arr = cdf[name + "_s"] = nlohmann::ordered_json::array();
      for (double v : s.components.at(name).samples) arr.push_back(times.mark(v));
    }
    doc["cdf"] = cdf;
  }
  return times.substitute(doc.dump(2)) + "\n";
}

}  // namespace vcsim
