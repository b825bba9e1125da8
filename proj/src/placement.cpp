#include "vcsim/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "vcsim/csv.hpp"
#include "vcsim/error.hpp"

namespace vcsim {

std::vector<RsuSite> place_rsus(const Trace& trace, std::span<const Vec2> candidates, std::size_t n_rsus,
                                double radius) {
  if (n_rsus > candidates.size()) throw ConfigError("more RSUs requested than candidate locations");
  if (!(radius > 0.0)) throw ConfigError("coverage radius must be positive");

  std::map<std::string, std::size_t> vehicle_index;
  for (const auto& s : trace.states) vehicle_index.emplace(s.vehicle_id, vehicle_index.size());
  std::vector<std::vector<bool>> covers(candidates.size(), std::vector<bool>(vehicle_index.size(), false));
  for (const auto& s : trace.states) {
    const std::size_t v = vehicle_index[s.vehicle_id];
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!covers[c][v] && distance(s.position, candidates[c]) <= radius) covers[c][v] = true;
    }
  }

  std::vector<bool> covered(vehicle_index.size(), false);
  std::vector<bool> chosen(candidates.size(), false);
  std::vector<RsuSite> out;
  for (std::size_t k = 0; k < n_rsus; ++k) {
    std::size_t best = candidates.size();
    std::size_t best_score = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (chosen[c]) continue;
      std::size_t score = 0;
      for (std::size_t v = 0; v < covered.size(); ++v) score += covers[c][v] && !covered[v];
      if (best == candidates.size() || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    chosen[best] = true;
    for (std::size_t v = 0; v < covered.size(); ++v) covered[v] = covered[v] || covers[best][v];
    char id[32];
    std::snprintf(id, sizeof id, "rsu%02zu", k);
    out.push_back({id, candidates[best], radius});
  }
  return out;
}

std::vector<Vec2> grid_candidates(const Bounds& bounds, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("candidate spacing must be positive");
  const auto nx = std::max<long>(1, std::lround(std::floor(bounds.width() / spacing)));
  const auto ny = std::max<long>(1, std::lround(std::floor(bounds.height() / spacing)));
  const double dx = bounds.width() / static_cast<double>(nx);
  const double dy = bounds.height() / static_cast<double>(ny);
  std::vector<Vec2> out;
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      out.push_back({bounds.min_x + (static_cast<double>(i) + 0.5) * dx, bounds.min_y + (static_cast<double>(j) + 0.5) * dy});
    }
  }
  return out;
}

std::map<std::string, double> success_fractions(const std::vector<BeaconRecord>& records,
                                                const std::vector<std::string>& rsu_ids) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // successes, covered
  for (const auto& id : rsu_ids) counts[id];
  for (const auto& r : records) {
    if (r.outcome == Outcome::uncovered || r.rsu_id.empty()) continue;
    auto& c = counts[r.rsu_id];
    c.second += 1;
    c.first += r.outcome == Outcome::success;
  }
  std::map<std::string, double> out;
  for (const auto& [id, c] : counts) {
    out[id] = c.second == 0 ? 1.0 : static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

double overall_success(const std::vector<BeaconRecord>& records) {
  std::size_t ok = 0, covered = 0;
  for (const auto& r : records) {
    if (r.outcome == Outcome::uncovered) continue;
    ++covered;
    ok += r.outcome == Outcome::success;
  }
  return covered == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(covered);
}

PlacementConfig::PlacementConfig(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw ConfigError("placement lists a switch twice");
  }
}

bool PlacementConfig::contains(const std::string& id) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

std::string PlacementConfig::key() const {
  std::string k;
  for (const auto& n : nodes_) {
    if (!k.empty()) k += '+';
    k += n;
  }
  return k;
}

PlacementConfig PlacementConfig::moved(const std::string& from, const std::string& to) const {
  std::vector<std::string> next;
  for (const auto& n : nodes_) next.push_back(n == from ? to : n);
  return PlacementConfig(std::move(next));
}

PlacementConfig parse_placement(const std::string& joined) {
  std::vector<std::string> nodes;
  for (auto part : csv::split(joined, '+')) {
    if (part.empty()) throw ConfigError("empty switch id in placement '" + joined + "'");
    nodes.emplace_back(part);
  }
  return PlacementConfig(std::move(nodes));
}

std::map<std::string, double> switch_scores(const TopologyGraph& topology,
                                            const std::map<std::string, double>& fractions) {
  auto fraction_of = [&](const std::string& id) {
    auto it = fractions.find(id);
    return it == fractions.end() ? 1.0 : it->second;
  };
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < topology.size(); ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    if (topology.node(i).kind == NodeKind::rsu) {
      sum += fraction_of(topology.node(i).id);
      ++count;
    }
    for (std::size_t j : topology.neighbors(i)) {
      if (topology.node(j).kind != NodeKind::rsu) continue;
      sum += fraction_of(topology.node(j).id);
      ++count;
    }
    out[topology.node(i).id] = count == 0 ? 1.0 : sum / static_cast<double>(count);
  }
  return out;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

RefinementState refine_step(RefinementState state, const TopologyGraph& topology,
                            const std::map<std::string, double>& fractions, double objective, Rng& rng,
                            const RefineOptions& options) {
  if (state.best_objective < 0.0 || objective > state.best_objective) {
    state.best = state.current;
    state.best_objective = objective;
  }

  const std::size_t n = state.current.size();
  std::vector<std::string> holders = state.current.nodes();
  std::vector<std::string> free;
  for (const auto& node : topology.nodes()) {
    if (!state.current.contains(node.id)) free.push_back(node.id);
  }
  std::sort(free.begin(), free.end());
  if (free.empty() || holders.empty() ||
      static_cast<double>(state.visited.size()) >= binomial(topology.size(), n)) {
    throw ExhaustedError("every placement of " + std::to_string(n) + " detectors has been tried");
  }

  const auto scores = switch_scores(topology, fractions);
  // Ids are sorted, so strict comparisons keep the smallest id on ties.
  std::string source = holders.front();
  for (const auto& h : holders) {
    const bool better = options.invert_source ? scores.at(h) < scores.at(source) : scores.at(h) > scores.at(source);
    if (better) source = h;
  }
  std::string target = free.front();
  for (const auto& s : free) {
    if (scores.at(s) < scores.at(target)) target = s;
  }

  PlacementConfig next = state.current.moved(source, target);
  state.last_mutated = false;
  if (state.visited.contains(next.key())) {
    state.last_mutated = true;
    bool found = false;
    for (std::size_t attempt = 0; attempt < options.mutation_attempts; ++attempt) {
      const auto& from = holders[rng.below(holders.size())];
      const auto& to = free[rng.below(free.size())];
      next = state.current.moved(from, to);
      if (!state.visited.contains(next.key())) {
        found = true;
        break;
      }
    }
    if (!found) throw ExhaustedError("no untried placement found after " + std::to_string(options.mutation_attempts) + " random moves");
  }
  state.visited.insert(next.key());
  state.current = std::move(next);
  ++state.iteration;
  return state;
}

RefineResult refine(std::size_t n, const TopologyGraph& topology, const Evaluator& evaluate, std::size_t max_iters,
                    std::uint64_t seed, const RefineOptions& options) {
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (n < 1 || n > topology.size()) throw ConfigError("detector count must lie in [1, number of switches]");

  Rng rng = Rng::stream(seed, "refinement");
  std::vector<std::string> ids;
  for (const auto& node : topology.nodes()) ids.push_back(node.id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < n; ++i) std::swap(ids[i], ids[i + rng.below(ids.size() - i)]);

  RefinementState state;
  state.current = PlacementConfig({ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n)});
  state.visited.insert(state.current.key());

  RefineResult result;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Evaluation ev = evaluate(state.current);
    result.log.push_back({it, state.current, ev.objective, state.last_mutated});
    if (result.log.size() == 1 || ev.objective > result.best_objective) {
      result.best = state.current;
      result.best_objective = ev.objective;
    }
    if (it + 1 == max_iters) break;
    try {
      state = refine_step(std::move(state), topology, ev.fractions, ev.objective, rng, options);
    } catch (const ExhaustedError&) {
      break;
    }
  }
  return result;
}

RefineResult refine(std::size_t n, const Scenario& scenario, std::size_t max_iters, std::uint64_t seed,
                    const RefineOptions& options) {
  const TopologyGraph topo = build_topology(scenario.rsus, scenario.n_core, scenario.topology, scenario.link);
  std::vector<std::string> rsu_ids;
  for (const auto& r : scenario.rsus) rsu_ids.push_back(r.rsu_id);
  Evaluator evaluate = [&](const PlacementConfig& config) {
    Scenario sc = scenario;
    sc.placement = config.nodes();
    const RunResult res = run(sc, topo);
    return Evaluation{success_fractions(res.records, rsu_ids), overall_success(res.records)};
  };
  return refine(n, topo, evaluate, max_iters, seed, options);
}

void write_refine_log(std::ostream& out, const std::vector<RefineLogEntry>& log) {
  out << kRefineLogHeader << '\n';
  for (const auto& e : log) {
    out << e.iteration << ',' << e.config.key() << ',' << csv::fixed(e.objective, 12) << ',' << (e.mutated ? 1 : 0)
        << '\n';
  }
}

}  // namespace vcsim
