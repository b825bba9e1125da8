#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vcsim/backhaul.hpp"
#include "vcsim/mobility.hpp"
#include "vcsim/rng.hpp"
#include "vcsim/simcore.hpp"

namespace vcsim {

/// Greedy RSU siting: repeatedly take the candidate covering the most
/// not-yet-covered vehicles (a vehicle counts if any of its states is within
/// `radius`), ties to the lowest candidate index. RSUs are named rsu00,
/// rsu01, ... in pick order.
std::vector<RsuSite> place_rsus(const Trace& trace, std::span<const Vec2> candidates, std::size_t n_rsus,
                                double radius = kDefaultCoverageRadius);

/// Regular grid of candidate locations with the given spacing, cell centred.
std::vector<Vec2> grid_candidates(const Bounds& bounds, double spacing);

/// Per RSU: successes over covered beacons. RSUs in `rsu_ids` without any
/// covered beacon get 1.
std::map<std::string, double> success_fractions(const std::vector<BeaconRecord>& records,
                                                const std::vector<std::string>& rsu_ids = {});

/// Overall success fraction over covered beacons (1 when none).
double overall_success(const std::vector<BeaconRecord>& records);

/// Detector switches, kept sorted and unique.
class PlacementConfig {
 public:
  PlacementConfig() = default;
  explicit PlacementConfig(std::vector<std::string> nodes);

  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool contains(const std::string& id) const;
  /// Node ids joined by '+'.
  std::string key() const;
  PlacementConfig moved(const std::string& from, const std::string& to) const;
  bool operator==(const PlacementConfig&) const = default;

 private:
  std::vector<std::string> nodes_;
};

PlacementConfig parse_placement(const std::string& joined);

struct RefineOptions {
  /// Move from the holder with the *lowest* score instead of the highest.
  bool invert_source = false;
  std::size_t mutation_attempts = 64;
};

struct RefinementState {
  PlacementConfig current;
  std::set<std::string> visited;  // canonical keys
  std::size_t iteration = 0;
  PlacementConfig best;
  double best_objective = -1.0;
  bool last_mutated = false;
};

/// Mean success fraction of the RSUs adjacent to each switch (plus the
/// switch itself if it is an RSU switch); 1 when there are none.
std::map<std::string, double> switch_scores(const TopologyGraph& topology,
                                            const std::map<std::string, double>& fractions);

/// Records the objective of `state.current`, then moves one detector from the
/// best-scoring holder to the worst-scoring free switch; if that placement
/// was already tried, moves a random detector to a random free switch
/// instead. Throws ExhaustedError when no untried placement can be reached.
RefinementState refine_step(RefinementState state, const TopologyGraph& topology,
                            const std::map<std::string, double>& fractions, double objective, Rng& rng,
                            const RefineOptions& options = {});

struct Evaluation {
  std::map<std::string, double> fractions;
  double objective = 0.0;
};

using Evaluator = std::function<Evaluation(const PlacementConfig&)>;

struct RefineLogEntry {
  std::size_t iteration = 0;
  PlacementConfig config;
  double objective = 0.0;
  bool mutated = false;
};

struct RefineResult {
  PlacementConfig best;
  double best_objective = 0.0;
  std::vector<RefineLogEntry> log;
};

/// Seeded random start, then evaluate / score / move for up to `max_iters`
/// evaluations. Exhaustion ends the loop early.
RefineResult refine(std::size_t n, const TopologyGraph& topology, const Evaluator& evaluate, std::size_t max_iters,
                    std::uint64_t seed, const RefineOptions& options = {});

/// Refinement where each placement is scored by a full simulation run.
RefineResult refine(std::size_t n, const Scenario& scenario, std::size_t max_iters, std::uint64_t seed,
                    const RefineOptions& options = {});

inline constexpr const char* kRefineLogHeader = "iteration,config,objective,mutated";
void write_refine_log(std::ostream& out, const std::vector<RefineLogEntry>& log);

}  // namespace vcsim
