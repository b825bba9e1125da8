#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code under test except for plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vcsim/backhaul.hpp"
#include "vcsim/collision.hpp"
#include "vcsim/mobility.hpp"

namespace oracle {

struct SteppedMin {
  double t = 0.0;
  double d = 0.0;
  std::size_t index = 0;  // sample index of the minimum
  std::size_t samples = 0;
};

/// Minimum separation of two constant-velocity tracks, sampled every `step`
/// seconds on [0, horizon]. Ties keep the earliest sample.
inline SteppedMin stepped_min(const vcsim::Beacon& a, const vcsim::Beacon& b, double horizon = 120.0,
                              double step = 1e-3) {
  const double px = a.x0.x - b.x0.x, py = a.x0.y - b.x0.y;
  const double vx = a.v.x - b.v.x, vy = a.v.y - b.v.y;
  const auto n = static_cast<std::size_t>(std::llround(horizon / step));
  SteppedMin best{0.0, std::numeric_limits<double>::infinity(), 0, n + 1};
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    const double dx = px + vx * t, dy = py + vy * t;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best.d) {
      best.d = d2;
      best.t = t;
      best.index = k;
    }
  }
  best.d = std::sqrt(best.d);
  return best;
}

/// Pseudonyms the stepped search flags: the sampled minimum over [0, 120] is
/// within d_min and lies after t = 0 (a minimum at the first sample means the
/// tracks are already separating, or never approach).
inline std::set<std::string> detect_bruteforce(const vcsim::Beacon& current, const std::vector<vcsim::Beacon>& window,
                                               double d_min) {
  std::set<std::string> out;
  for (const auto& b : window) {
    if (b.pseudonym == current.pseudonym) continue;
    const double vx = current.v.x - b.v.x, vy = current.v.y - b.v.y;
    if (vx == 0.0 && vy == 0.0) {
      if (std::hypot(current.x0.x - b.x0.x, current.x0.y - b.x0.y) <= d_min) out.insert(b.pseudonym);
      continue;
    }
    const auto m = stepped_min(current, b);
    if (m.d <= d_min && m.index > 0) out.insert(b.pseudonym);
  }
  return out;
}

/// Midpoint-rule integral of the CCH wait over one sync interval, divided by
/// the interval: the mean air delay for a uniformly random generation phase.
inline double mean_access_delay_quadrature(double sync, double cch, double tx, std::size_t cells = 1'000'000) {
  double sum = 0.0;
  const double h = sync / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double phase = (static_cast<double>(i) + 0.5) * h;
    const double wait = phase + tx <= cch ? 0.0 : sync - phase;
    sum += (wait + tx) * h;
  }
  return sum / sync;
}

struct PathChoice {
  double latency = std::numeric_limits<double>::infinity();
  std::vector<std::string> ids;
};

/// Exhaustive enumeration of simple paths; least latency, then the
/// lexicographically smallest id sequence.
inline PathChoice best_path_exhaustive(const vcsim::TopologyGraph& g, std::size_t src, std::size_t dst) {
  PathChoice best;
  std::vector<std::size_t> path{src};
  std::vector<bool> on(g.size(), false);
  on[src] = true;
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double lat) {
    if (u == dst) {
      std::vector<std::string> ids;
      for (auto i : path) ids.push_back(g.node(i).id);
      if (lat < best.latency || (lat == best.latency && ids < best.ids)) best = {lat, ids};
      return;
    }
    for (const auto& l : g.links()) {
      std::size_t v;
      if (l.a == u) v = l.b;
      else if (l.b == u) v = l.a;
      else continue;
      if (on[v]) continue;
      on[v] = true;
      path.push_back(v);
      dfs(v, lat + l.params.latency);
      path.pop_back();
      on[v] = false;
    }
  };
  dfs(src, 0.0);
  return best;
}

/// Edge set of the construction rules computed by a plain scan over all
/// node pairs, given the core positions.
inline std::set<std::pair<std::string, std::string>> expected_edges(const std::vector<vcsim::RsuSite>& rsus,
                                                                    const std::vector<vcsim::Vec2>& cores,
                                                                    bool mesh) {
  std::set<std::pair<std::string, std::string>> edges;
  auto add = [&](std::string a, std::string b) {
    if (a > b) std::swap(a, b);
    edges.emplace(a, b);
  };
  std::vector<std::pair<std::string, vcsim::Vec2>> core_nodes;
  for (std::size_t c = 0; c < cores.size(); ++c) core_nodes.emplace_back("core" + std::to_string(c), cores[c]);
  for (std::size_t i = 0; i < core_nodes.size(); ++i)
    for (std::size_t j = i + 1; j < core_nodes.size(); ++j) add(core_nodes[i].first, core_nodes[j].first);

  auto k_nearest = [](vcsim::Vec2 from, std::vector<std::pair<std::string, vcsim::Vec2>> cands, std::size_t k) {
    std::vector<std::tuple<double, std::string>> scored;
    for (auto& [id, p] : cands) scored.emplace_back(std::hypot(p.x - from.x, p.y - from.y), id);
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(std::get<1>(scored[i]));
    return out;
  };
  for (const auto& r : rsus) {
    for (const auto& c : k_nearest(r.position, core_nodes, mesh ? 2 : 1)) add(r.rsu_id, c);
    if (mesh) {
      std::vector<std::pair<std::string, vcsim::Vec2>> others;
      for (const auto& o : rsus)
        if (o.rsu_id != r.rsu_id) others.emplace_back(o.rsu_id, o.position);
      for (const auto& o : k_nearest(r.position, others, 2)) add(r.rsu_id, o);
    }
  }
  return edges;
}

/// Greedy RSU siting recomputed with explicit vehicle sets; returns the
/// chosen candidate indices in pick order.
inline std::vector<std::size_t> greedy_sites(const vcsim::Trace& trace, const std::vector<vcsim::Vec2>& candidates,
                                             std::size_t n, double radius) {
  std::vector<std::set<std::string>> sets(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (const auto& s : trace.states)
      if (std::hypot(s.position.x - candidates[c].x, s.position.y - candidates[c].y) <= radius)
        sets[c].insert(s.vehicle_id);
  std::set<std::string> covered;
  std::vector<std::size_t> picks;
  for (std::size_t k = 0; k < n; ++k) {
    long best = -1;
    std::size_t best_score = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (std::find(picks.begin(), picks.end(), c) != picks.end()) continue;
      std::size_t score = 0;
      for (const auto& v : sets[c]) score += !covered.contains(v);
      if (best < 0 || score > best_score) {
        best = static_cast<long>(c);
        best_score = score;
      }
    }
    picks.push_back(static_cast<std::size_t>(best));
    covered.insert(sets[best].begin(), sets[best].end());
  }
  return picks;
}

/// All k-subsets of `ids` (sorted input gives sorted subsets).
inline std::vector<std::vector<std::string>> subsets(const std::vector<std::string>& ids, std::size_t k) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < ids.size(); ++i) {
      cur.push_back(ids[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace oracle
