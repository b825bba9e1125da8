#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "vcsim/rng.hpp"

namespace vcsim {

/// IEEE 1609.4 alternating access: every sync interval starts with the CCH
/// interval, beacons only go out on the CCH.
struct WaveParams {
  double sync_interval = 0.100;  // s
  double cch_duration = 0.050;   // s
  double data_rate = 6e6;        // bit/s
  double payload_bits = 2400.0;  // 300-byte beacon
  double max_contention = 0.002; // s, upper end of the uniform access jitter
  double loss_probability = 0.0;

  double tx_time() const { return payload_bits / data_rate; }
  void validate() const;
};

/// Air-time from generation to reception: wait for a CCH slot the frame fits
/// into, transmit, plus uniform jitter on [0, max_contention]. Always draws
/// exactly one value from `rng`.
double access_delay(double t_gen, const WaveParams& params, Rng& rng);

/// Per-beacon air delays measured elsewhere, keyed by (vehicle_id, seq).
struct DelayFile {
  std::map<std::pair<std::string, std::size_t>, double> entries;
};

inline constexpr const char* kDelayFileHeader = "vehicle_id,seq,delay_s";

DelayFile parse_delay_file(std::istream& in);

enum class MissingDelayPolicy { strict, fallback };

/// Looks up the delay for (vehicle_id, seq). A missing key throws
/// MissingDelayError under `strict`, or falls back to access_delay(t_gen).
double injected_delay(const DelayFile& file, const std::string& vehicle_id, std::size_t seq,
                      MissingDelayPolicy policy, double t_gen, const WaveParams& params, Rng& rng);

/// Air segment used by the simulator: uplink comes from the built-in model or
/// an injected file, downlink always from the built-in model.
class RadioLink {
 public:
  explicit RadioLink(WaveParams params = {});
  RadioLink(WaveParams params, DelayFile injected, MissingDelayPolicy policy);

  double uplink(const std::string& vehicle_id, std::size_t seq, double t_gen, Rng& rng) const;
  double downlink(double t_at_rsu, Rng& rng) const;
  /// True when the frame is lost on air.
  bool lost(Rng& rng) const;

  const WaveParams& params() const { return params_; }
  bool injecting() const { return injected_.has_value(); }

 private:
  WaveParams params_;
  std::optional<DelayFile> injected_;
  MissingDelayPolicy policy_ = MissingDelayPolicy::strict;
};

}  // namespace vcsim
