#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "scenarios.hpp"
#include "vcsim/error.hpp"
#include "vcsim/placement.hpp"

using namespace vcsim;

namespace {

BeaconRecord rec(const std::string& rsu, Outcome o) {
  BeaconRecord r;
  r.rsu_id = rsu;
  r.outcome = o;
  return r;
}

// Line of switches a - b - c (all RSUs).
TopologyGraph line3() {
  TopologyGraph g;
  g.add_node({"a", NodeKind::rsu, {}});
  g.add_node({"b", NodeKind::rsu, {}});
  g.add_node({"c", NodeKind::rsu, {}});
  g.add_link(0, 1);
  g.add_link(1, 2);
  return g;
}

// Five RSUs around one core; fraction of an RSU falls with its hop distance
// to the nearest detector, weighted by a fixed per-RSU demand.
struct ToyObjective {
  TopologyGraph topo;
  std::map<std::string, double> demand;

  ToyObjective() {
    const std::vector<RsuSite> rsus{{"r0", {0, 0}, 255},   {"r1", {400, 0}, 255}, {"r2", {800, 0}, 255},
                                    {"r3", {0, 400}, 255}, {"r4", {900, 900}, 255}};
    topo = build_topology(rsus, 1, TopologyKind::star);
    demand = {{"r0", 1.0}, {"r1", 3.0}, {"r2", 0.5}, {"r3", 2.0}, {"r4", 1.5}};
  }

  Evaluation operator()(const PlacementConfig& c) const {
    const Router router(topo);
    Evaluation ev;
    double num = 0, den = 0;
    for (const auto& [id, w] : demand) {
      double hops = 1e9;
      for (const auto& d : c.nodes())
        hops = std::min<double>(hops, router.path(topo.index_of(id), topo.index_of(d)).size() - 1);
      const double f = 1.0 / (1.0 + hops);
      ev.fractions[id] = f;
      num += w * f;
      den += w;
    }
    ev.objective = num / den;
    return ev;
  }
};

}  // namespace

TEST_CASE("place_rsus: trivial cases") {
  const Trace t = synth_trace(1, 5, 3, {0, 0, 100, 100});
  const std::vector<Vec2> one{{50, 50}};
  const auto r = place_rsus(t, one, 1);
  REQUIRE(r.size() == 1);
  CHECK(r[0].rsu_id == "rsu00");
  CHECK(r[0].position == Vec2{50, 50});
  CHECK_THROWS_AS(place_rsus(t, one, 2), ConfigError);
  CHECK_THROWS_AS(place_rsus(t, one, 1, 0), ConfigError);
  CHECK(place_rsus(t, one, 0).empty());
}

TEST_CASE("place_rsus: bigger disjoint group first") {
  Trace t;
  for (int i = 0; i < 3; ++i) t.states.push_back({"s" + std::to_string(i), 0, {0, double(i)}, {}});
  for (int i = 0; i < 10; ++i) t.states.push_back({"b" + std::to_string(i), 0, {1000, double(i)}, {}});
  const std::vector<Vec2> cands{{0, 0}, {1000, 0}};
  const auto r = place_rsus(t, cands, 2, 50);
  REQUIRE(r.size() == 2);
  CHECK(r[0].position == Vec2{1000, 0});
  CHECK(r[1].position == Vec2{0, 0});
  CHECK(r[1].rsu_id == "rsu01");
}

TEST_CASE("place_rsus: matches an independent greedy scorer") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Trace t = synth_trace(seed, 40, 20, {0, 0, 1500, 1500});
    Rng rng(seed);
    std::vector<Vec2> cands;
    for (int i = 0; i < 6; ++i) cands.push_back({rng.uniform(0, 1500), rng.uniform(0, 1500)});
    const auto got = place_rsus(t, cands, 3, 255);
    const auto want = oracle::greedy_sites(t, cands, 3, 255);
    REQUIRE(got.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(got[k].position == cands[want[k]]);
  }
}

TEST_CASE("grid_candidates") {
  const auto c = grid_candidates({0, 0, 1000, 500}, 250);
  CHECK(c.size() == 8);
  CHECK(c.front() == Vec2{125, 125});
  CHECK(c.back() == Vec2{875, 375});
  CHECK(grid_candidates({0, 0, 10, 10}, 100).size() == 1);
  CHECK_THROWS_AS(grid_candidates({0, 0, 10, 10}, 0), ConfigError);
}

TEST_CASE("success_fractions and overall_success") {
  std::vector<BeaconRecord> all_ok{rec("a", Outcome::success), rec("b", Outcome::success)};
  for (const auto& [_, f] : success_fractions(all_ok)) CHECK(f == 1.0);
  std::vector<BeaconRecord> mix{rec("a", Outcome::success), rec("a", Outcome::success), rec("a", Outcome::success),
                                rec("a", Outcome::late), rec("", Outcome::uncovered), rec("b", Outcome::lost)};
  const auto f = success_fractions(mix, {"a", "b", "idle"});
  CHECK(f.at("a") == 0.75);
  CHECK(f.at("b") == 0.0);
  CHECK(f.at("idle") == 1.0);
  CHECK(f.size() == 3);
  CHECK(overall_success(mix) == doctest::Approx(3.0 / 5));
  CHECK(overall_success({}) == 1.0);
}

TEST_CASE("success_fractions: recomputed from the records CSV") {
  const auto sc = scenarios::synthetic(12, 60, 6, 1000, 2, 1, {"core0"});
  const auto res = run(sc);
  std::ostringstream out;
  write_records_csv(out, res.records);
  // Count straight from the text.
  std::map<std::string, std::pair<int, int>> counts;
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (f[10] == "uncovered") continue;
    counts[f[2]].second++;
    counts[f[2]].first += f[10] == "success";
  }
  const auto got = success_fractions(res.records);
  REQUIRE(got.size() == counts.size());
  for (const auto& [id, c] : counts) CHECK(got.at(id) == static_cast<double>(c.first) / c.second);
}

TEST_CASE("PlacementConfig canonical form") {
  const PlacementConfig c({"b", "a", "c"});
  CHECK(c.key() == "a+b+c");
  CHECK(c.contains("b"));
  CHECK_FALSE(c.contains("z"));
  CHECK(c.moved("b", "z").key() == "a+c+z");
  CHECK(parse_placement("c+a") == PlacementConfig({"a", "c"}));
  CHECK_THROWS_AS(PlacementConfig({"a", "a"}), ConfigError);
  CHECK_THROWS_AS(parse_placement("a++b"), ConfigError);
  CHECK_THROWS_AS(c.moved("a", "b"), ConfigError);
}

TEST_CASE("switch_scores: adjacent RSUs plus itself") {
  const std::vector<RsuSite> rsus{{"a", {0, 0}, 255}, {"b", {1000, 0}, 255}};
  const auto g = build_topology(rsus, 1, TopologyKind::star);
  const auto s = switch_scores(g, {{"a", 0.2}, {"b", 0.6}});
  CHECK(s.at("a") == doctest::Approx(0.2));
  CHECK(s.at("b") == doctest::Approx(0.6));
  CHECK(s.at("core0") == doctest::Approx(0.4));
  TopologyGraph lone;
  lone.add_node({"c", NodeKind::core, {}});
  CHECK(switch_scores(lone, {}).at("c") == 1.0);
}

TEST_CASE("refine_step: moves from the best holder to the worst free switch") {
  const auto g = line3();
  RefinementState st;
  st.current = PlacementConfig({"a"});
  st.visited = {"a"};
  Rng rng(1);
  // Scores: a=(0.9+0.5)/2, b=(0.9+0.5+0.1)/3, c=(0.5+0.1)/2.
  const std::map<std::string, double> f{{"a", 0.9}, {"b", 0.5}, {"c", 0.1}};
  const auto next = refine_step(st, g, f, 0.4, rng);
  CHECK(next.current.key() == "c");
  CHECK_FALSE(next.last_mutated);
  CHECK(next.visited.size() == 2);
  CHECK(next.iteration == 1);
  CHECK(next.best.key() == "a");
  CHECK(next.best_objective == 0.4);

  RefineOptions inv;
  inv.invert_source = true;
  RefinementState two;
  two.current = PlacementConfig({"a", "b"});
  two.visited = {"a+b"};
  CHECK(refine_step(two, g, f, 0.4, rng).current.key() == "b+c");       // a leaves
  CHECK(refine_step(two, g, f, 0.4, rng, inv).current.key() == "a+c");  // b leaves
}

TEST_CASE("refine_step: a revisit triggers a mutation, full coverage ends the walk") {
  const auto g = line3();
  const std::map<std::string, double> f{{"a", 0.9}, {"b", 0.5}, {"c", 0.1}};
  Rng rng(2);
  RefinementState st;
  st.current = PlacementConfig({"a"});
  st.visited = {"a", "c"};
  const auto next = refine_step(st, g, f, 0.4, rng);
  CHECK(next.last_mutated);
  CHECK(next.current.key() == "b");
  CHECK(next.visited.size() == 3);
  CHECK_THROWS_AS(refine_step(next, g, f, 0.5, rng), ExhaustedError);

  RefinementState full;
  full.current = PlacementConfig({"a", "b", "c"});
  full.visited = {"a+b+c"};
  CHECK_THROWS_AS(refine_step(full, g, f, 0.5, rng), ExhaustedError);
}

TEST_CASE("refine: toy instance reaches the enumeration optimum") {
  const ToyObjective toy;
  std::vector<std::string> ids;
  for (const auto& n : toy.topo.nodes()) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t n = 1; n <= 3; ++n) {
    double optimum = -1;
    for (const auto& s : oracle::subsets(ids, n)) optimum = std::max(optimum, toy(PlacementConfig(s)).objective);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto res = refine(n, toy.topo, std::cref(toy), 32, seed);
      CHECK(res.best_objective == doctest::Approx(optimum));
      // No placement is evaluated twice and the best never regresses.
      std::set<std::string> seen;
      double best = -1;
      for (const auto& e : res.log) {
        CHECK(seen.insert(e.config.key()).second);
        CHECK(e.config.size() == n);
        best = std::max(best, e.objective);
      }
      CHECK(best == res.best_objective);
    }
  }
}

TEST_CASE("refine: single iteration, determinism and argument checks") {
  const ToyObjective toy;
  const auto one = refine(2, toy.topo, std::cref(toy), 1, 7);
  REQUIRE(one.log.size() == 1);
  CHECK(one.best_objective == one.log[0].objective);
  CHECK(one.best == one.log[0].config);

  const auto a = refine(2, toy.topo, std::cref(toy), 10, 7), b = refine(2, toy.topo, std::cref(toy), 10, 7);
  std::ostringstream la, lb;
  write_refine_log(la, a.log);
  write_refine_log(lb, b.log);
  CHECK(la.str() == lb.str());
  CHECK(la.str().rfind(kRefineLogHeader, 0) == 0);

  CHECK_THROWS_AS(refine(2, toy.topo, std::cref(toy), 0, 7), ConfigError);
  CHECK_THROWS_AS(refine(0, toy.topo, std::cref(toy), 5, 7), ConfigError);
  CHECK_THROWS_AS(refine(7, toy.topo, std::cref(toy), 5, 7), ConfigError);
  // Exhaustion ends the loop early.
  CHECK(refine(1, toy.topo, std::cref(toy), 100, 7).log.size() <= 6);
}

TEST_CASE("refine: simulation-scored loop") {
  const auto sc = scenarios::synthetic(5, 40, 4, 1000, 2, 1, {"core0"});
  const auto res = refine(1, sc, 4, 3);
  CHECK(res.log.size() == 4);
  CHECK(res.best_objective >= 0.0);
  CHECK(res.best_objective <= 1.0);
  const auto again = refine(1, sc, 4, 3);
  for (std::size_t i = 0; i < res.log.size(); ++i) CHECK(again.log[i].objective == res.log[i].objective);
}
