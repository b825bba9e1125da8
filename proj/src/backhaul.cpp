#include "vcsim/backhaul.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "vcsim/error.hpp"

namespace vcsim {

const char* to_string(NodeKind k) { return k == NodeKind::rsu ? "rsu" : "core"; }
const char* to_string(TopologyKind k) { return k == TopologyKind::star ? "star" : "mesh"; }

TopologyKind parse_topology_kind(const std::string& s) {
  if (s == "star") return TopologyKind::star;
  if (s == "mesh") return TopologyKind::mesh;
  throw ConfigError("unknown topology kind '" + s + "' (expected star or mesh)");
}

void LinkParams::validate() const {
  if (!(latency >= 0.0)) throw ConfigError("link latency must be non-negative");
  if (!(bandwidth > 0.0)) throw ConfigError("link bandwidth must be positive");
}

// ---------------------------------------------------------------------------
// TopologyGraph

std::size_t TopologyGraph::add_node(SwitchNode node) {
  if (node.id.empty()) throw ConfigError("switch id must be non-empty");
  if (index_.contains(node.id)) throw ConfigError("duplicate switch id '" + node.id + "'");
  const std::size_t i = nodes_.size();
  index_.emplace(node.id, i);
  nodes_.push_back(std::move(node));
  adjacency_.emplace_back();
  edge_index_.clear();
  for (std::size_t l = 0; l < links_.size(); ++l) edge_index_[links_[l].a * nodes_.size() + links_[l].b] = l;
  return i;
}

void TopologyGraph::add_link(std::size_t a, std::size_t b, LinkParams params) {
  if (!add_link_once(a, b, params)) {
    throw ConfigError("duplicate link " + nodes_[a].id + " - " + nodes_[b].id);
  }
}

bool TopologyGraph::add_link_once(std::size_t a, std::size_t b, LinkParams params) {
  if (a >= nodes_.size() || b >= nodes_.size()) throw ConfigError("link endpoint out of range");
  if (a == b) throw ConfigError("self-loop at " + nodes_[a].id);
  params.validate();
  if (a > b) std::swap(a, b);
  if (has_link(a, b)) return false;
  const std::size_t l = links_.size();
  links_.push_back({a, b, params});
  edge_index_[a * nodes_.size() + b] = l;
  adjacency_[a].push_back(l);
  adjacency_[b].push_back(l);
  return true;
}

std::optional<std::size_t> TopologyGraph::find(const std::string& id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t TopologyGraph::index_of(const std::string& id) const {
  if (auto i = find(id)) return *i;
  throw ConfigError("unknown switch '" + id + "'");
}

bool TopologyGraph::has_link(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  return edge_index_.contains(a * nodes_.size() + b);
}

const Link& TopologyGraph::link_between(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  auto it = edge_index_.find(a * nodes_.size() + b);
  if (it == edge_index_.end()) throw RoutingError("no link " + nodes_.at(a).id + " - " + nodes_.at(b).id);
  return links_[it->second];
}

std::vector<std::size_t> TopologyGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t l : adjacency_.at(i)) out.push_back(links_[l].a == i ? links_[l].b : links_[l].a);
  std::sort(out.begin(), out.end(), [&](std::size_t x, std::size_t y) { return nodes_[x].id < nodes_[y].id; });
  return out;
}

bool TopologyGraph::connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t l : adjacency_[u]) {
      const std::size_t v = links_[l].a == u ? links_[l].b : links_[l].a;
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == nodes_.size();
}

std::string TopologyGraph::to_json() const {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : nodes_) {
    doc["nodes"].push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"x_m", n.position.x}, {"y_m", n.position.y}});
  }
  doc["links"] = nlohmann::ordered_json::array();
  for (const auto& l : links_) {
    doc["links"].push_back({{"a", nodes_[l.a].id},
                            {"b", nodes_[l.b].id},
                            {"latency_s", l.params.latency},
                            {"bandwidth_bps", l.params.bandwidth}});
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Construction

namespace {

std::vector<const RsuSite*> sorted_by_id(std::span<const RsuSite> rsus) {
  std::vector<const RsuSite*> out;
  for (const auto& r : rsus) out.push_back(&r);
  std::sort(out.begin(), out.end(), [](const RsuSite* a, const RsuSite* b) { return a->rsu_id < b->rsu_id; });
  return out;
}

/// The k candidates closest to `from`, ties by node id.
std::vector<std::size_t> nearest(const TopologyGraph& g, std::size_t from, const std::vector<std::size_t>& candidates,
                                 std::size_t k) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t c : candidates) {
    if (c == from) continue;
    scored.emplace_back(distance(g.node(from).position, g.node(c).position), c);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return g.node(x.second).id < g.node(y.second).id;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace

std::vector<Vec2> core_positions(std::span<const RsuSite> rsus, std::size_t n_core) {
  const auto sorted = sorted_by_id(rsus);
  const std::size_t m = sorted.size();
  if (n_core == 0 || n_core > m) throw ConfigError("need 1 <= n_core <= number of RSUs");

  std::vector<Vec2> centroids(n_core);
  for (std::size_t i = 0; i < n_core; ++i) centroids[i] = sorted[i * m / n_core]->position;

  std::vector<std::size_t> assignment(m, n_core);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t p = 0; p < m; ++p) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n_core; ++c) {
        const double d = norm2(sorted[p]->position - centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[p] != best) {
        assignment[p] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Vec2> sum(n_core);
    std::vector<std::size_t> count(n_core, 0);
    for (std::size_t p = 0; p < m; ++p) {
      sum[assignment[p]] = sum[assignment[p]] + sorted[p]->position;
      ++count[assignment[p]];
    }
    for (std::size_t c = 0; c < n_core; ++c) {
      if (count[c] > 0) centroids[c] = sum[c] * (1.0 / static_cast<double>(count[c]));
    }
  }
  return centroids;
}

TopologyGraph build_topology(std::span<const RsuSite> rsus, std::size_t n_core, TopologyKind kind, LinkParams link) {
  if (rsus.empty()) throw ConfigError("topology needs at least one RSU");
  if (n_core < 1) throw ConfigError("topology needs at least one core switch");
  if (n_core > rsus.size()) throw ConfigError("more core switches than RSUs");
  if (kind == TopologyKind::mesh && (rsus.size() < 3 || n_core < 2)) {
    throw ConfigError("mesh topology needs at least 3 RSUs and 2 core switches");
  }
  link.validate();

  TopologyGraph g;
  g.host_link = link;
  std::vector<std::size_t> rsu_nodes, core_nodes;
  for (const RsuSite* r : sorted_by_id(rsus)) rsu_nodes.push_back(g.add_node({r->rsu_id, NodeKind::rsu, r->position}));
  const auto centroids = core_positions(rsus, n_core);
  for (std::size_t c = 0; c < n_core; ++c) {
    core_nodes.push_back(g.add_node({"core" + std::to_string(c), NodeKind::core, centroids[c]}));
  }

  for (std::size_t i = 0; i < core_nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < core_nodes.size(); ++j) g.add_link(core_nodes[i], core_nodes[j], link);
  }
  const std::size_t cores_per_rsu = kind == TopologyKind::star ? 1 : 2;
  for (std::size_t r : rsu_nodes) {
    for (std::size_t c : nearest(g, r, core_nodes, cores_per_rsu)) g.add_link_once(r, c, link);
  }
  if (kind == TopologyKind::mesh) {
    for (std::size_t r : rsu_nodes) {
      for (std::size_t o : nearest(g, r, rsu_nodes, 2)) g.add_link_once(r, o, link);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Routing

namespace {

bool id_sequence_less(const TopologyGraph& g, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [&](std::size_t x, std::size_t y) { return g.node(x).id < g.node(y).id; });
}

}  // namespace

Router::Router(const TopologyGraph& graph) : graph_(&graph) {
  const std::size_t n = graph.size();
  const double inf = std::numeric_limits<double>::infinity();
  paths_.assign(n, std::vector<std::vector<std::size_t>>(n));
  latency_.assign(n, std::vector<double>(n, inf));
  for (std::size_t s = 0; s < n; ++s) {
    auto& dist = latency_[s];
    auto& path = paths_[s];
    std::vector<bool> done(n, false);
    dist[s] = 0.0;
    path[s] = {s};
    // Dense Dijkstra; labels compare by (latency, id sequence).
    for (std::size_t round = 0; round < n; ++round) {
      std::size_t u = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (done[v] || dist[v] == inf) continue;
        if (u == n || dist[v] < dist[u] || (dist[v] == dist[u] && id_sequence_less(graph, path[v], path[u]))) u = v;
      }
      if (u == n) break;
      done[u] = true;
      for (std::size_t v : graph.neighbors(u)) {
        if (done[v]) continue;
        const double cand = dist[u] + graph.link_between(u, v).params.latency;
        auto cand_path = path[u];
        cand_path.push_back(v);
        if (cand < dist[v] || (cand == dist[v] && id_sequence_less(graph, cand_path, path[v]))) {
          dist[v] = cand;
          path[v] = std::move(cand_path);
        }
      }
    }
  }
}

const std::vector<std::size_t>& Router::path(std::size_t src, std::size_t dst) const {
  const auto& p = paths_.at(src).at(dst);
  if (p.empty()) {
    throw RoutingError("no route " + graph_->node(src).id + " -> " + graph_->node(dst).id);
  }
  return p;
}

double Router::latency(std::size_t src, std::size_t dst) const { return latency_.at(src).at(dst); }

// ---------------------------------------------------------------------------
// Controller and rule tables

ControllerModel ControllerModel::fast() { return {0.0005, 10.0, 1.0}; }
ControllerModel ControllerModel::heavy() { return {0.0015, 10.0, 4.0}; }

ControllerModel ControllerModel::preset(const std::string& name) {
  if (name == "fast") return fast();
  if (name == "heavy") return heavy();
  throw ConfigError("unknown controller profile '" + name + "' (expected fast or heavy)");
}

void ControllerModel::validate() const {
  if (!(service_latency >= 0.0)) throw ConfigError("controller service_latency must be non-negative");
  if (!(rule_idle_timeout > 0.0)) throw ConfigError("rule_idle_timeout must be positive");
  if (!(jitter_spread >= 1.0)) throw ConfigError("jitter_spread must be >= 1");
}

std::string RuleTables::key(const std::string& dst, const std::string& src) {
  std::string k;
  k.reserve(dst.size() + src.size() + 1);
  k += dst;
  k += '\x1f';
  k += src;
  return k;
}

FlowRule* RuleTables::lookup(std::size_t sw, const std::string& dst, const std::string& src, double t, double timeout) {
  auto& table = tables_.at(sw);
  auto it = table.find(key(dst, src));
  if (it == table.end()) return nullptr;
  if (t - it->second.last_used > timeout) {
    table.erase(it);
    return nullptr;
  }
  return &it->second;
}

void RuleTables::install(std::size_t sw, const std::string& dst, const std::string& src, std::size_t out_port,
                         double t) {
  auto& rule = tables_.at(sw)[key(dst, src)];
  rule.switch_index = sw;
  rule.match_dst = dst;
  rule.match_src = src;
  rule.out_port = out_port;
  rule.last_used = std::max(rule.last_used, t);
}

void RuleTables::purge(std::size_t sw, double t, double timeout) {
  std::erase_if(tables_.at(sw), [&](const auto& kv) { return t - kv.second.last_used > timeout; });
}

void RuleTables::maybe_purge(std::size_t sw, double t, double timeout) {
  if (tables_.at(sw).size() < sweep_at_[sw]) return;
  purge(sw, t, timeout);
  sweep_at_[sw] = std::max<std::size_t>(1024, 2 * tables_[sw].size());
}

bool SwitchLoad::admit(std::size_t sw, double t) {
  if (capacity_ <= 0.0) return true;
  auto& q = recent_.at(sw);
  while (!q.empty() && q.front() <= t - 1.0) q.pop_front();
  if (static_cast<double>(q.size()) >= capacity_) return false;
  q.push_back(t);
  return true;
}

ForwardResult forward(const Packet& packet, const Router& router, RuleTables& tables,
                      const ControllerModel& controller, double t_now, Rng* rng, SwitchLoad* load) {
  const TopologyGraph& g = router.graph();
  const auto src = g.find(packet.src.switch_id);
  const auto dst = g.find(packet.dst.switch_id);
  if (!src || !dst) throw RoutingError("endpoint attached to an unknown switch");
  const auto& path = router.path(*src, *dst);

  auto hop = [&](const LinkParams& l) { return l.latency + packet.size_bits / l.bandwidth; };

  ForwardResult out;
  double t = t_now + hop(g.host_link);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t sw = path[i];
    out.hops.push_back(g.node(sw).id);
    if (load && !load->admit(sw, t)) {
      out.dropped = true;
      out.arrival_time = t;
      return out;
    }
    const std::size_t next = i + 1 < path.size() ? path[i + 1] : kHostPort;
    const std::size_t prev = i > 0 ? path[i - 1] : kHostPort;
    if (FlowRule* rule = tables.lookup(sw, packet.dst.host, packet.src.host, t, controller.rule_idle_timeout)) {
      rule->last_used = std::max(rule->last_used, t);
    } else {
      double detour = controller.service_latency;
      if (rng && controller.jitter_spread > 1.0) detour *= std::pow(controller.jitter_spread, rng->uniform() - 0.5);
      t += detour;
      out.detour_time += detour;
      ++out.controller_detours;
      tables.install(sw, packet.dst.host, packet.src.host, next, t);
    }
    // Learn where the source lives so the reverse flow is already in place.
    tables.install(sw, packet.src.host, packet.dst.host, prev, t);
    tables.maybe_purge(sw, t, controller.rule_idle_timeout);
    if (next != kHostPort) t += hop(g.link_between(sw, next).params);
  }
  out.arrival_time = t + hop(g.host_link);
  return out;
}

}  // namespace vcsim
