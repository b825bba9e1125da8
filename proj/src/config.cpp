#include "vcsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "vcsim/csv.hpp"
#include "vcsim/placement.hpp"

namespace vcsim {

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults{
      {"trace_file", ""},      {"synth_vehicles", "100"}, {"synth_duration", "60"},
      {"bounds", "0,0,1500,1000"}, {"speed_min", "2"},   {"speed_max", "15"},
      {"turn_probability", "0.05"}, {"rsu_file", ""},     {"rsu_count", "20"},
      {"rsu_spacing", "125"},  {"rsu_radius", "255"},     {"topology", "star"},
      {"n_core", "4"},         {"controller", "fast"},    {"service_latency", ""},
      {"rule_timeout", ""},    {"switch_capacity_pps", "0"}, {"placement", ""},
      {"refine_n", ""},        {"refine_iters", "30"},    {"refine_invert", "false"},
      {"radio", "model"},      {"delay_file", ""},        {"missing_delay", "strict"},
      {"max_contention", "0.002"}, {"air_loss", "0"},     {"beacon_phase", "cch"},
      {"flows", "per_beacon"}, {"deadline", "0.020"},     {"d_min", "5"},
      {"window_timeout", "1"}, {"cost_base", "1"},        {"cost_per_neighbor", "1"},
      {"seconds_per_cost", "1e-5"}, {"drain", "5"},       {"seed", "1"},
      {"output_dir", "out"},
  };
  return defaults;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig kv;
  csv::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    std::string_view t = line;
    if (auto hash = t.find('#'); hash != std::string_view::npos) t = t.substr(0, hash);
    t = csv::trim(t);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(reader.line_no()) + ": expected key = value");
    }
    kv.set(std::string(csv::trim(t.substr(0, eq))), std::string(csv::trim(t.substr(eq + 1))));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse(in);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!config_defaults().contains(key)) throw UsageError("unknown config key '" + key + "'");
  values_[key] = value;
}

void KeyValueConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("expected key=value, got '" + assignment + "'");
  set(std::string(csv::trim(std::string_view(assignment).substr(0, eq))),
      std::string(csv::trim(std::string_view(assignment).substr(eq + 1))));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return std::nullopt;
}

namespace {

class Reader {
 public:
  explicit Reader(const KeyValueConfig& kv) : kv_(kv) {}

  std::string str(const std::string& key) const {
    if (auto v = kv_.get(key)) return *v;
    return config_defaults().at(key);
  }
  bool set(const std::string& key) const { return kv_.has(key) && !kv_.get(key)->empty(); }

  double num(const std::string& key) const {
    const std::string s = str(key);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
      throw UsageError("config key '" + key + "': expected a number, got '" + s + "'");
    }
    return v;
  }
  std::uint64_t count(const std::string& key) const {
    const std::string s = str(key);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
      throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }
  bool flag(const std::string& key) const {
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw UsageError("config key '" + key + "': expected true or false");
  }
  std::string choice(const std::string& key, std::initializer_list<const char*> allowed) const {
    const std::string s = str(key);
    for (const char* a : allowed) {
      if (s == a) return s;
    }
    throw UsageError("config key '" + key + "': unsupported value '" + s + "'");
  }

 private:
  const KeyValueConfig& kv_;
};

}  // namespace

ScenarioConfig ScenarioConfig::from(const KeyValueConfig& kv) {
  const Reader r(kv);
  ScenarioConfig c;

  const bool synth_keys = kv.has("synth_vehicles") || kv.has("synth_duration") || kv.has("speed_min") ||
                          kv.has("speed_max") || kv.has("turn_probability");
  if (r.set("trace_file")) {
    if (synth_keys) throw UsageError("give either trace_file or synth_* keys, not both");
    c.trace_file = r.str("trace_file");
  }
  c.synth_vehicles = r.count("synth_vehicles");
  c.synth_duration = r.num("synth_duration");
  {
    const std::string b = r.str("bounds");
    const auto f = csv::split(b);
    if (f.size() != 4) throw UsageError("config key 'bounds': expected min_x,min_y,max_x,max_y");
    double v[4];
    for (int i = 0; i < 4; ++i) {
      auto [p, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v[i]);
      if (ec != std::errc() || p != f[i].data() + f[i].size()) throw UsageError("config key 'bounds': bad number");
    }
    c.bounds = {v[0], v[1], v[2], v[3]};
  }
  c.speed_min = r.num("speed_min");
  c.speed_max = r.num("speed_max");
  c.turn_probability = r.num("turn_probability");

  if (r.set("rsu_file")) {
    if (kv.has("rsu_count") || kv.has("rsu_spacing")) throw UsageError("give either rsu_file or rsu_count/rsu_spacing, not both");
    c.rsu_file = r.str("rsu_file");
  }
  c.rsu_count = r.count("rsu_count");
  c.rsu_spacing = r.num("rsu_spacing");
  c.rsu_radius = r.num("rsu_radius");

  c.topology = r.choice("topology", {"star", "mesh"}) == "star" ? TopologyKind::star : TopologyKind::mesh;
  c.n_core = r.count("n_core");
  c.controller = r.choice("controller", {"fast", "heavy"});
  if (r.set("service_latency")) c.service_latency = r.num("service_latency");
  if (r.set("rule_timeout")) c.rule_timeout = r.num("rule_timeout");
  c.switch_capacity_pps = r.num("switch_capacity_pps");

  if (r.set("placement")) {
    if (r.set("refine_n")) throw UsageError("give either placement or refine_n, not both");
    try {
      c.placement = parse_placement(r.str("placement")).nodes();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  if (r.set("refine_n")) c.refine_n = r.count("refine_n");
  c.refine_iters = r.count("refine_iters");
  c.refine_invert = r.flag("refine_invert");

  c.inject = r.choice("radio", {"model", "inject"}) == "inject";
  if (r.set("delay_file")) c.delay_file = r.str("delay_file");
  if (c.inject && !c.delay_file) throw UsageError("radio = inject needs delay_file");
  c.missing_delay =
      r.choice("missing_delay", {"strict", "fallback"}) == "strict" ? MissingDelayPolicy::strict : MissingDelayPolicy::fallback;
  c.max_contention = r.num("max_contention");
  c.air_loss = r.num("air_loss");
  c.beacon_phase = r.choice("beacon_phase", {"cch", "uniform"}) == "cch" ? BeaconPhaseMode::cch : BeaconPhaseMode::uniform;
  c.flows = r.choice("flows", {"per_beacon", "per_vehicle"}) == "per_beacon" ? FlowMode::per_beacon : FlowMode::per_vehicle;

  c.deadline = r.num("deadline");
  c.d_min = r.num("d_min");
  c.window_timeout = r.num("window_timeout");
  c.cost_base = r.num("cost_base");
  c.cost_per_neighbor = r.num("cost_per_neighbor");
  c.seconds_per_cost = r.num("seconds_per_cost");
  c.drain = r.num("drain");
  c.seed = r.count("seed");
  c.output_dir = r.str("output_dir");
  if (!(c.deadline > 0.0)) throw UsageError("deadline must be positive");
  return c;
}

namespace {

std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open " + p.string());
  return in;
}

}  // namespace

Trace ScenarioConfig::load_trace() const {
  if (trace_file) {
    auto in = open_input(*trace_file);
    return parse_trace(in);
  }
  return synth_trace(seed, synth_vehicles, synth_duration, bounds,
                     SynthOptions{{speed_min, speed_max}, turn_probability});
}

std::vector<RsuSite> ScenarioConfig::load_rsus(const Trace& trace) const {
  if (rsu_file) {
    auto in = open_input(*rsu_file);
    return parse_rsus(in);
  }
  return place_rsus(trace, grid_candidates(trace.bounds, rsu_spacing), rsu_count, rsu_radius);
}

Scenario ScenarioConfig::materialize() const {
  Scenario sc;
  sc.trace = load_trace();
  sc.rsus = load_rsus(sc.trace);
  sc.topology = topology;
  sc.n_core = n_core;
  sc.controller_profile = controller;
  sc.controller = ControllerModel::preset(controller);
  if (service_latency) sc.controller.service_latency = *service_latency;
  if (rule_timeout) sc.controller.rule_idle_timeout = *rule_timeout;
  sc.switch_capacity_pps = switch_capacity_pps;
  sc.placement = placement;
  sc.detector = DetectorParams{d_min, window_timeout, cost_base, cost_per_neighbor, seconds_per_cost};
  sc.wave.max_contention = max_contention;
  sc.wave.loss_probability = air_loss;
  if (inject) {
    auto in = open_input(*delay_file);
    sc.injected_delays = parse_delay_file(in);
  }
  sc.missing_delay = missing_delay;
  sc.phase = beacon_phase;
  sc.flows = flows;
  sc.deadline = deadline;
  sc.drain = drain;
  sc.seed = seed;
  return sc;
}

}  // namespace vcsim
