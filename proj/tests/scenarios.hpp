#pragma once

// Small scenario builders shared by the unit and acceptance tests.

#include <cstdio>
#include <string>
#include <vector>

#include "vcsim/placement.hpp"
#include "vcsim/simcore.hpp"

namespace scenarios {

inline vcsim::Bounds square(double side) { return {0, 0, side, side}; }

/// RSUs on a regular grid, cell centred, named g00, g01, ...
inline std::vector<vcsim::RsuSite> grid_rsus(const vcsim::Bounds& b, std::size_t per_side, double radius = 255) {
  std::vector<vcsim::RsuSite> out;
  const double dx = b.width() / static_cast<double>(per_side), dy = b.height() / static_cast<double>(per_side);
  for (std::size_t j = 0; j < per_side; ++j) {
    for (std::size_t i = 0; i < per_side; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "g%02zu", out.size());
      out.push_back({id, {b.min_x + (static_cast<double>(i) + 0.5) * dx, b.min_y + (static_cast<double>(j) + 0.5) * dy},
                     radius});
    }
  }
  return out;
}

/// Synthetic trace with a grid of RSUs and the given detector switches.
inline vcsim::Scenario synthetic(std::uint64_t seed, std::size_t vehicles, double duration, double side,
                                 std::size_t rsus_per_side, std::size_t n_core,
                                 std::vector<std::string> placement) {
  vcsim::Scenario sc;
  sc.trace = vcsim::synth_trace(seed, vehicles, duration, square(side));
  sc.rsus = grid_rsus(square(side), rsus_per_side);
  sc.n_core = n_core;
  sc.placement = std::move(placement);
  sc.seed = seed;
  return sc;
}

}  // namespace scenarios
