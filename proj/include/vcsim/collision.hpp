#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vcsim/geometry.hpp"

namespace vcsim {

struct Beacon {
  std::string pseudonym;
  Vec2 x0;  // m
  Vec2 v;   // m/s
  double t_gen = 0.0;
};

/// Recently received beacons, at most one per pseudonym.
class BeaconWindow {
 public:
  explicit BeaconWindow(double timeout = 1.0);

  /// Drops entries with t_now - t_gen > timeout.
  void prune(double t_now);
  /// Inserts or replaces the entry for b.pseudonym.
  void insert(const Beacon& b);

  double timeout() const { return timeout_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, Beacon>& entries() const { return entries_; }

 private:
  double timeout_;
  std::map<std::string, Beacon> entries_;
};

enum class CpaKind {
  approaching,  // t* >= 0
  diverging,    // t* < 0, closest approach already happened
  parallel,     // zero relative velocity, distance is constant
};

/// Closest point of approach of two constant-velocity tracks. For `parallel`
/// t_star is 0 and d_star the constant separation; for `diverging` t_star is
/// the (negative) stationary time and d_star the current separation.
struct CpaResult {
  CpaKind kind = CpaKind::parallel;
  double t_star = 0.0;
  double d_star = 0.0;
};

CpaResult cpa_pair(const Beacon& a, const Beacon& b);

struct CollisionPrediction {
  std::string other;
  double t_star = 0.0;
  double d_star = 0.0;
  bool operator==(const CollisionPrediction&) const = default;
};

struct DetectorParams {
  double d_min = 5.0;    // m
  double timeout = 1.0;  // s
  double cost_base = 1.0;
  double cost_per_neighbor = 1.0;
  /// Converts cost units to in-detector service time; 100 neighbours ~ 1 ms.
  double seconds_per_cost = 1e-5;

  void validate() const;
};

/// Alerts for `current` against the window: every other pseudonym whose
/// closest approach (now or in the future) is within d_min. Prunes the window
/// to t_now first and inserts `current` afterwards. Result is ordered by
/// pseudonym.
std::vector<CollisionPrediction> detect(const Beacon& current, BeaconWindow& window,
                                        const DetectorParams& params, double t_now);

/// cost_base + cost_per_neighbor * window_size.
double processing_cost(std::size_t window_size, const DetectorParams& params);

/// A detector instance: its window plus load and energy bookkeeping.
class Detector {
 public:
  struct Outcome {
    std::vector<CollisionPrediction> predictions;
    std::size_t window_size = 0;  // entries compared against
    double cost = 0.0;
    double service_time = 0.0;
    /// Alerts delivered in the reply: this beacon's predictions plus alerts
    /// queued for the sender by earlier beacons of other vehicles.
    std::size_t alerts = 0;
  };

  explicit Detector(DetectorParams params = {});

  Outcome process(const Beacon& current, double t_now);

  const DetectorParams& params() const { return params_; }
  const BeaconWindow& window() const { return window_; }
  std::size_t beacons_processed() const { return processed_; }
  std::size_t watched_vehicles() const { return watched_.size(); }
  double total_cost() const { return total_cost_; }

 private:
  DetectorParams params_;
  BeaconWindow window_;
  std::map<std::string, std::size_t> pending_alerts_;
  std::set<std::string> watched_;
  std::size_t processed_ = 0;
  double total_cost_ = 0.0;
};

}  // namespace vcsim
