#include "vcsim/radio.hpp"

#include <cmath>
#include <istream>

#include "vcsim/csv.hpp"
#include "vcsim/error.hpp"

namespace vcsim {

void WaveParams::validate() const {
  if (!(sync_interval > 0.0)) throw ConfigError("sync_interval must be positive");
  if (!(cch_duration > 0.0) || cch_duration > sync_interval) {
    throw ConfigError("cch_duration must lie in (0, sync_interval]");
  }
  if (!(data_rate > 0.0) || !(payload_bits > 0.0)) throw ConfigError("data_rate and payload_bits must be positive");
  if (!(tx_time() < cch_duration)) throw ConfigError("a beacon must fit into one CCH interval");
  if (!(max_contention >= 0.0)) throw ConfigError("max_contention must be non-negative");
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0)) throw ConfigError("loss_probability must be in [0, 1]");
}

double access_delay(double t_gen, const WaveParams& params, Rng& rng) {
  if (!std::isfinite(t_gen) || t_gen < 0.0) throw DomainError("t_gen must be finite and non-negative");
  const double tx = params.tx_time();
  const double phase = std::fmod(t_gen, params.sync_interval);
  const double wait = phase + tx <= params.cch_duration ? 0.0 : params.sync_interval - phase;
  const double jitter = rng.uniform() * params.max_contention;
  return wait + tx + jitter;
}

DelayFile parse_delay_file(std::istream& in) {
  csv::LineReader reader(in);
  csv::expect_header(reader, kDelayFileHeader);
  DelayFile file;
  std::string line;
  while (reader.next(line)) {
    const auto t = csv::trim(line);
    if (t.empty() || t.starts_with("#")) continue;
    const std::size_t n = reader.line_no();
    const auto f = csv::split(t);
    if (f.size() != 3) throw ParseError(n, "expected 3 fields, got " + std::to_string(f.size()));
    const long long seq = csv::to_int(f[1], n, "seq");
    const double delay = csv::to_double(f[2], n, "delay_s");
    if (seq < 0) throw ParseError(n, "negative seq");
    if (delay < 0.0) throw ParseError(n, "negative delay");
    if (!file.entries.emplace(std::pair{std::string(f[0]), static_cast<std::size_t>(seq)}, delay).second) {
      throw ParseError(n, "duplicate delay entry");
    }
  }
  return file;
}

double injected_delay(const DelayFile& file, const std::string& vehicle_id, std::size_t seq,
                      MissingDelayPolicy policy, double t_gen, const WaveParams& params, Rng& rng) {
  if (auto it = file.entries.find({vehicle_id, seq}); it != file.entries.end()) return it->second;
  if (policy == MissingDelayPolicy::strict) {
    throw MissingDelayError("no injected delay for vehicle " + vehicle_id + " seq " + std::to_string(seq));
  }
  return access_delay(t_gen, params, rng);
}

RadioLink::RadioLink(WaveParams params) : params_(params) { params_.validate(); }

RadioLink::RadioLink(WaveParams params, DelayFile injected, MissingDelayPolicy policy)
    : params_(params), injected_(std::move(injected)), policy_(policy) {
  params_.validate();
}

double RadioLink::uplink(const std::string& vehicle_id, std::size_t seq, double t_gen, Rng& rng) const {
  if (injected_) return injected_delay(*injected_, vehicle_id, seq, policy_, t_gen, params_, rng);
  return access_delay(t_gen, params_, rng);
}

double RadioLink::downlink(double t_at_rsu, Rng& rng) const { return access_delay(t_at_rsu, params_, rng); }

bool RadioLink::lost(Rng& rng) const {
  if (params_.loss_probability <= 0.0) return false;
  return rng.bernoulli(params_.loss_probability);
}

}  // namespace vcsim
