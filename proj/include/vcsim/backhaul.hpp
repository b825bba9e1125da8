#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vcsim/geometry.hpp"
#include "vcsim/mobility.hpp"
#include "vcsim/rng.hpp"

namespace vcsim {

enum class NodeKind { rsu, core };
enum class TopologyKind { star, mesh };

const char* to_string(NodeKind k);
const char* to_string(TopologyKind k);
TopologyKind parse_topology_kind(const std::string& s);

struct LinkParams {
  double latency = 0.00012;  // s
  double bandwidth = 1e9;    // bit/s
  void validate() const;
};

struct SwitchNode {
  std::string id;
  NodeKind kind = NodeKind::rsu;
  Vec2 position;
};

/// Undirected link between node indices a < b.
struct Link {
  std::size_t a = 0;
  std::size_t b = 0;
  LinkParams params;
};

/// Switches and the links between them. Host access links (RSU host or
/// detector host to its switch) all share `host_link`.
class TopologyGraph {
 public:
  std::size_t add_node(SwitchNode node);
  /// Throws ConfigError on self-loops, duplicates or unknown endpoints.
  void add_link(std::size_t a, std::size_t b, LinkParams params = {});
  /// Adds the link unless it already exists; returns whether it was added.
  bool add_link_once(std::size_t a, std::size_t b, LinkParams params = {});

  std::size_t size() const { return nodes_.size(); }
  const SwitchNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<SwitchNode>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  std::optional<std::size_t> find(const std::string& id) const;
  /// Throws ConfigError for unknown ids.
  std::size_t index_of(const std::string& id) const;
  bool has_link(std::size_t a, std::size_t b) const;
  const Link& link_between(std::size_t a, std::size_t b) const;
  /// Neighbour indices, sorted by node id.
  std::vector<std::size_t> neighbors(std::size_t i) const;
  bool connected() const;

  LinkParams host_link;

  /// {nodes:[{id,kind,x_m,y_m}], links:[{a,b,latency_s,bandwidth_bps}]}
  std::string to_json() const;

 private:
  std::vector<SwitchNode> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::size_t, std::size_t> edge_index_;  // key a * size + b
  std::vector<std::vector<std::size_t>> adjacency_;          // link indices per node
};

/// Core switch positions: Lloyd iterations over the RSU positions, seeded
/// with RSUs at evenly spaced ranks of the sorted RSU ids.
std::vector<Vec2> core_positions(std::span<const RsuSite> rsus, std::size_t n_core);

/// RSU switches (id = rsu_id) plus n_core core switches ("core0", ...). Star:
/// cores fully meshed, each RSU to its nearest core. Mesh: additionally each
/// RSU to its two nearest cores and two nearest RSUs. Distance ties go to
/// the smallest node id.
TopologyGraph build_topology(std::span<const RsuSite> rsus, std::size_t n_core, TopologyKind kind,
                             LinkParams link = {});

/// All-pairs shortest paths by total latency, ties broken by the
/// lexicographically smallest sequence of node ids.
class Router {
 public:
  explicit Router(const TopologyGraph& graph);
  const TopologyGraph& graph() const { return *graph_; }
  /// Node indices from src to dst inclusive. Throws RoutingError if none.
  const std::vector<std::size_t>& path(std::size_t src, std::size_t dst) const;
  double latency(std::size_t src, std::size_t dst) const;

 private:
  const TopologyGraph* graph_;
  std::vector<std::vector<std::vector<std::size_t>>> paths_;
  std::vector<std::vector<double>> latency_;
};

struct ControllerModel {
  double service_latency = 0.0005;  // s per packet-in
  double rule_idle_timeout = 10.0;  // s
  /// Ratio between the slowest and fastest packet-in; per-detour latency is
  /// log-uniform on service_latency * [spread^-1/2, spread^1/2].
  double jitter_spread = 1.0;

  static ControllerModel fast();
  static ControllerModel heavy();
  static ControllerModel preset(const std::string& name);
  void validate() const;
};

/// A learning-switch flow entry. Entries match exact flows, i.e. a
/// destination and a source host.
struct FlowRule {
  std::size_t switch_index = 0;
  std::string match_dst;
  std::string match_src;
  std::size_t out_port = 0;  // next-hop node index, or kHostPort
  double last_used = 0.0;
};

inline constexpr std::size_t kHostPort = static_cast<std::size_t>(-1);

class RuleTables {
 public:
  explicit RuleTables(std::size_t n_switches = 0) : tables_(n_switches), sweep_at_(n_switches, 1024) {}

  /// Rule for (switch, dst, src) if present and not idle past the timeout.
  FlowRule* lookup(std::size_t sw, const std::string& dst, const std::string& src, double t, double timeout);
  /// Inserts or refreshes.
  void install(std::size_t sw, const std::string& dst, const std::string& src, std::size_t out_port, double t);
  /// Drops rules idle for longer than `timeout` at time t.
  void purge(std::size_t sw, double t, double timeout);
  void maybe_purge(std::size_t sw, double t, double timeout);

  std::size_t size(std::size_t sw) const { return tables_.at(sw).size(); }
  std::size_t switches() const { return tables_.size(); }

 private:
  static std::string key(const std::string& dst, const std::string& src);
  std::vector<std::unordered_map<std::string, FlowRule>> tables_;
  std::vector<std::size_t> sweep_at_;
};

struct Endpoint {
  std::string host;
  std::string switch_id;  // switch the host hangs off
};

struct Packet {
  Endpoint src;
  Endpoint dst;
  double size_bits = 2400.0;
};

struct ForwardResult {
  double arrival_time = 0.0;
  std::vector<std::string> hops;  // switch ids traversed
  std::size_t controller_detours = 0;
  double detour_time = 0.0;
  bool dropped = false;
};

/// Optional per-switch overload cap; packets beyond `capacity_pps` within a
/// trailing one-second window are dropped. Zero disables it.
class SwitchLoad {
 public:
  SwitchLoad(std::size_t n_switches, double capacity_pps) : recent_(n_switches), capacity_(capacity_pps) {}
  /// Records a packet at the switch; false when it must be dropped.
  bool admit(std::size_t sw, double t);

 private:
  std::vector<std::deque<double>> recent_;
  double capacity_;
};

/// Sends a packet from src host to dst host: host link, then the shortest
/// switch path with a controller detour at every switch lacking a live rule
/// for the flow, then the host link to the destination. Every traversed
/// switch also learns the reverse flow, so replies find warm rules.
/// `rng` is needed only for a jittery controller; `load` may be null.
ForwardResult forward(const Packet& packet, const Router& router, RuleTables& tables,
                      const ControllerModel& controller, double t_now, Rng* rng = nullptr,
                      SwitchLoad* load = nullptr);

}  // namespace vcsim
