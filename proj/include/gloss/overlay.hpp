#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gloss/error.hpp"
#include "gloss/events.hpp"
#include "gloss/geo.hpp"
#include "gloss/hearsay.hpp"
#include "gloss/profile_cache.hpp"

namespace gloss {

/// A server in the hybrid hierarchy. Peer links and child maps are derived
/// from parent declarations; the known map holds optional non-local routing
/// shortcuts.
struct OverlayNode {
  NodeId id;
  RegionId managed;
  std::optional<NodeId> parent;
  std::map<RegionId, NodeId> children;
  std::vector<NodeId> peers;          // siblings under the same parent, sorted
  std::map<RegionId, NodeId> known;   // region -> node managing it
  int depth = 0;                      // distance from a hierarchy root

  HearsayStore hearsay;
  ProfileCache cache;
  std::map<UserId, Profile> home_profiles;
};

/// The routable unit of global communication.
struct MessageEnvelope {
  std::string msg_id;
  RegionId target;
  Event payload;
  int hops = 0;
  std::set<NodeId> visited;
  NodeId origin;
};

enum class RouteAction {
  Local,
  ToChild,
  ToKnownPeer,
  ToParent,
  BroadcastPeers,
};

inline const char* route_action_name(RouteAction a) {
  switch (a) {
    case RouteAction::Local: return "local";
    case RouteAction::ToChild: return "to-child";
    case RouteAction::ToKnownPeer: return "to-known-peer";
    case RouteAction::ToParent: return "to-parent";
    case RouteAction::BroadcastPeers: return "broadcast-peers";
  }
  return "?";
}

struct RoutingDecision {
  RouteAction action = RouteAction::Local;
  NodeId next;  // set for ToChild / ToKnownPeer / ToParent
};

class Network {
public:
  Network(WorldTree world, int hop_limit = 32)
      : world_(std::move(world)), hop_limit_(hop_limit) {
    if (hop_limit <= 0) throw LoadError("hop_limit must be positive");
  }

  void add_node(NodeId id, RegionId managed,
                std::optional<NodeId> parent = std::nullopt,
                std::map<RegionId, NodeId> known = {}) {
    if (nodes_.count(id) != 0) {
      throw LoadError("duplicate node id '" + id + "'");
    }
    if (world_.find(managed) == nullptr) {
      throw LoadError("node '" + id + "' manages unknown region '" + managed +
                      "'");
    }
    if (region_owner_.count(managed) != 0) {
      throw LoadError("region '" + managed + "' already managed by '" +
                      region_owner_.at(managed) + "', claimed again by '" + id +
                      "'");
    }
    OverlayNode node;
    node.id = id;
    node.managed = managed;
    node.parent = std::move(parent);
    node.known = std::move(known);
    region_owner_[node.managed] = id;
    nodes_.emplace(std::move(id), std::move(node));
  }

  /// Derives child maps, peer sets and depths, then checks hierarchy
  /// invariants. Call once after the last add_node.
  void finalize() {
    std::vector<NodeId> top_level;
    for (auto& [id, node] : nodes_) {
      if (!node.parent.has_value()) {
        top_level.push_back(id);
        continue;
      }
      auto pit = nodes_.find(*node.parent);
      if (pit == nodes_.end()) {
        throw LoadError("node '" + id + "' names unknown parent '" +
                        *node.parent + "'");
      }
      OverlayNode& parent = pit->second;
      if (!is_ancestor(world_, parent.managed, node.managed)) {
        throw LoadError("node '" + id + "' manages region '" + node.managed +
                        "' which is not a strict descendant of parent's '" +
                        parent.managed + "'");
      }
      parent.children[node.managed] = id;
    }

    // Peers: same parent, or fellow top-level nodes.
    for (auto& [id, node] : nodes_) {
      std::vector<NodeId> sibs;
      if (node.parent.has_value()) {
        for (const auto& [r, c] : nodes_.at(*node.parent).children) {
          if (c != id) sibs.push_back(c);
        }
      } else {
        for (const auto& t : top_level) {
          if (t != id) sibs.push_back(t);
        }
      }
      std::sort(sibs.begin(), sibs.end());
      node.peers = std::move(sibs);
    }

    for (const auto& [id, node] : nodes_) {
      for (const auto& [region, target] : node.known) {
        if (world_.find(region) == nullptr) {
          throw LoadError("node '" + id + "' knows unknown region '" + region +
                          "'");
        }
        if (nodes_.count(target) == 0) {
          throw LoadError("node '" + id + "' knows unknown node '" + target +
                          "'");
        }
      }
    }

    // Depth assignment also detects parent cycles.
    for (auto& [id, node] : nodes_) {
      int depth = 0;
      const OverlayNode* cur = &node;
      while (cur->parent.has_value()) {
        ++depth;
        if (depth > static_cast<int>(nodes_.size())) {
          throw LoadError("node parent links form a cycle at '" + id + "'");
        }
        cur = &nodes_.at(*cur->parent);
      }
      node.depth = depth;
    }
    finalized_ = true;
  }

  const WorldTree& world() const { return world_; }
  int hop_limit() const { return hop_limit_; }
  void set_hop_limit(int limit) {
    if (limit <= 0) throw LoadError("hop_limit must be positive");
    hop_limit_ = limit;
  }

  bool finalized() const { return finalized_; }

  const std::map<NodeId, OverlayNode>& nodes() const { return nodes_; }

  OverlayNode& node(const NodeId& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw InternalError("unknown node '" + id + "'");
    return it->second;
  }
  const OverlayNode& node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw InternalError("unknown node '" + id + "'");
    return it->second;
  }
  bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }

  const std::map<RegionId, NodeId>& region_owner() const {
    return region_owner_;
  }
  std::optional<NodeId> owner_of(const RegionId& region) const {
    auto it = region_owner_.find(region);
    if (it == region_owner_.end()) return std::nullopt;
    return it->second;
  }

  /// Registers a profile at its home node and indexes the user.
  void register_profile(Profile profile) {
    if (profile.contacts.empty()) {
      throw LoadError("profile for '" + profile.user +
                      "' has no contact methods");
    }
    auto it = nodes_.find(profile.home);
    if (it == nodes_.end()) {
      throw LoadError("profile for '" + profile.user +
                      "' names unknown home node '" + profile.home + "'");
    }
    homes_[profile.user] = profile.home;
    UserId user = profile.user;
    it->second.home_profiles[std::move(user)] = std::move(profile);
  }

  std::optional<NodeId> home_of(const UserId& user) const {
    auto it = homes_.find(user);
    if (it == homes_.end()) return std::nullopt;
    return it->second;
  }

private:
  WorldTree world_;
  std::map<NodeId, OverlayNode> nodes_;
  std::map<RegionId, NodeId> region_owner_;
  std::map<UserId, NodeId> homes_;
  int hop_limit_;
  bool finalized_ = false;
};

/// Chooses the next routing step for an envelope held at a node. Preference
/// order: handle locally, descend to a covering child, jump via a covering
/// known shortcut, climb to the parent, and only then broadcast to peers.
/// A known shortcut is used only when it is at least as deep as the point
/// where the climb would turn downward, so shortcuts never lengthen routes.
inline std::optional<RoutingDecision> decide(const OverlayNode& node,
                                             const WorldTree& world,
                                             const MessageEnvelope& env) {
  const RegionId& target = env.target;
  if (world.find(target) == nullptr) return std::nullopt;

  if (target == node.managed) {
    return RoutingDecision{RouteAction::Local, node.id};
  }

  const Region* best_child = nullptr;
  NodeId best_child_node;
  for (const auto& [region, child] : node.children) {
    if (env.visited.count(child) != 0) continue;
    if (!in_subtree(world, region, target)) continue;
    const Region& r = world.at(region);
    if (best_child == nullptr || r.depth > best_child->depth) {
      best_child = &r;
      best_child_node = child;
    }
  }
  if (best_child != nullptr) {
    return RoutingDecision{RouteAction::ToChild, best_child_node};
  }

  // Where the up-and-over route would turn downward: the deepest region in
  // this node's ancestor-or-self chain that covers the target.
  const Region* turn = &world.at(node.managed);
  while (!in_subtree(world, turn->id, target)) {
    turn = &world.at(*turn->parent);  // the root covers everything
  }

  const Region* best_known = nullptr;
  NodeId best_known_node;
  for (const auto& [region, peer] : node.known) {
    if (peer == node.id || env.visited.count(peer) != 0) continue;
    if (region == node.managed) continue;
    if (!in_subtree(world, region, target)) continue;
    const Region& r = world.at(region);
    if (r.depth < turn->depth) continue;
    if (best_known == nullptr || r.depth > best_known->depth) {
      best_known = &r;
      best_known_node = peer;
    }
  }
  if (best_known != nullptr) {
    return RoutingDecision{RouteAction::ToKnownPeer, best_known_node};
  }

  // Deepest responsible: the target is below us and nobody more specific
  // can take it.
  if (is_ancestor(world, node.managed, target)) {
    return RoutingDecision{RouteAction::Local, node.id};
  }

  if (node.parent.has_value() && env.visited.count(*node.parent) == 0) {
    return RoutingDecision{RouteAction::ToParent, *node.parent};
  }
  return RoutingDecision{RouteAction::BroadcastPeers, NodeId{}};
}

enum class DeliveryStatus { Delivered, Undeliverable };

enum class DeliveryFailure { None, HopLimit, NoRoute, UnknownTarget };

inline const char* delivery_failure_name(DeliveryFailure f) {
  switch (f) {
    case DeliveryFailure::None: return "none";
    case DeliveryFailure::HopLimit: return "hop-limit";
    case DeliveryFailure::NoRoute: return "no-route";
    case DeliveryFailure::UnknownTarget: return "unknown-target";
  }
  return "?";
}

/// Processing-order record of one delivery, including any broadcast
/// branches.
struct DeliveryTrace {
  std::vector<NodeId> order;                       // nodes that processed it
  std::vector<std::pair<NodeId, NodeId>> forwards; // hop edges taken
  DeliveryStatus status = DeliveryStatus::Undeliverable;
  DeliveryFailure failure = DeliveryFailure::NoRoute;
  std::optional<NodeId> delivered_at;
  int delivered_hops = 0;  // hop count of the envelope that arrived
};

/// Observation points for metrics; every callback is optional.
class RouteObserver {
public:
  virtual ~RouteObserver() = default;
  virtual void on_process(const NodeId&, const MessageEnvelope&) {}
  virtual void on_forward(const NodeId&, const NodeId&,
                          const MessageEnvelope&) {}
};

/// A hook run at each processing node before routing; returning true ends
/// the delivery there. Lets request/reply protocols answer mid-path.
using DeliveryInterceptor =
    std::function<bool(const NodeId&, const MessageEnvelope&)>;

/// Routes an envelope from a starting node until one node handles it
/// locally or no progress is possible. Broadcast duplicates fan out
/// breadth-first; a node processes a given msg_id at most once, so at most
/// one node delivers it.
inline DeliveryTrace deliver(Network& net, const NodeId& start,
                             MessageEnvelope env,
                             RouteObserver* observer = nullptr,
                             const DeliveryInterceptor& interceptor = {}) {
  DeliveryTrace trace;
  if (net.world().find(env.target) == nullptr) {
    trace.failure = DeliveryFailure::UnknownTarget;
    return trace;
  }
  if (!net.has_node(start)) {
    throw InternalError("deliver: unknown start node '" + start + "'");
  }

  struct InFlight {
    NodeId at;
    MessageEnvelope env;
  };
  std::deque<InFlight> queue;
  std::set<NodeId> processed;
  bool hit_hop_limit = false;
  queue.push_back({start, std::move(env)});

  while (!queue.empty()) {
    InFlight cur = std::move(queue.front());
    queue.pop_front();
    if (processed.count(cur.at) != 0) continue;
    if (cur.env.hops >= net.hop_limit()) {
      hit_hop_limit = true;
      continue;
    }
    processed.insert(cur.at);
    cur.env.visited = processed;
    trace.order.push_back(cur.at);
    if (observer != nullptr) observer->on_process(cur.at, cur.env);

    if (interceptor && interceptor(cur.at, cur.env)) {
      trace.status = DeliveryStatus::Delivered;
      trace.failure = DeliveryFailure::None;
      trace.delivered_at = cur.at;
      trace.delivered_hops = cur.env.hops;
      return trace;
    }

    const OverlayNode& node = net.node(cur.at);
    auto decision = decide(node, net.world(), cur.env);
    if (!decision.has_value()) {
      trace.failure = DeliveryFailure::UnknownTarget;
      return trace;
    }

    auto forward = [&](const NodeId& to) {
      MessageEnvelope next = cur.env;
      next.hops += 1;
      trace.forwards.emplace_back(cur.at, to);
      if (observer != nullptr) observer->on_forward(cur.at, to, next);
      queue.push_back({to, std::move(next)});
    };

    switch (decision->action) {
      case RouteAction::Local:
        trace.status = DeliveryStatus::Delivered;
        trace.failure = DeliveryFailure::None;
        trace.delivered_at = cur.at;
        trace.delivered_hops = cur.env.hops;
        return trace;
      case RouteAction::ToChild:
      case RouteAction::ToKnownPeer:
      case RouteAction::ToParent:
        forward(decision->next);
        break;
      case RouteAction::BroadcastPeers:
        for (const auto& peer : node.peers) {
          if (processed.count(peer) == 0) forward(peer);
        }
        break;
    }
  }

  trace.status = DeliveryStatus::Undeliverable;
  trace.failure =
      hit_hop_limit ? DeliveryFailure::HopLimit : DeliveryFailure::NoRoute;
  return trace;
}

/// The start-to-terminal node chain of a delivery, reconstructed from the
/// hop edges. When broadcasts duplicated the envelope, the chain of the
/// copy that arrived is returned.
inline std::vector<NodeId> delivery_path(const DeliveryTrace& trace) {
  if (trace.order.empty()) return {};
  std::vector<NodeId> path;
  NodeId cur = trace.delivered_at.value_or(trace.order.back());
  const NodeId& start = trace.order.front();
  path.push_back(cur);
  while (cur != start) {
    bool found = false;
    for (const auto& [from, to] : trace.forwards) {
      if (to == cur) {  // first matching edge is the copy that was processed
        cur = from;
        path.push_back(cur);
        found = true;
        break;
      }
    }
    if (!found) {
      throw InternalError("delivery trace has a gap at '" + cur + "'");
    }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct IngressResult {
  enum class Status { Ok, OutsideWorld } status = Status::Ok;
  RegionId target;
  MessageEnvelope envelope;
  DeliveryTrace trace;
};

/// Gateway entry point: resolves a location report to its deepest region
/// and routes an enter-where envelope toward that region's node.
inline IngressResult ingress(Network& net, const NodeId& gateway,
                             const LocationPayload& location,
                             std::string msg_id,
                             RouteObserver* observer = nullptr) {
  IngressResult result;
  auto region = resolve_deepest(net.world(), location.point);
  if (!region.has_value()) {
    result.status = IngressResult::Status::OutsideWorld;
    return result;
  }
  result.target = *region;
  MessageEnvelope env;
  env.msg_id = std::move(msg_id);
  env.target = *region;
  env.payload =
      make_event(EnterWherePayload{location.user, *region, location.t});
  env.origin = gateway;
  result.envelope = env;
  result.trace = deliver(net, gateway, std::move(env), observer);
  return result;
}

/// Parses topology records: `node_id region parent|- known|-` where known
/// is `region=node[,region=node...]`. An optional `hop_limit N` line sets
/// the network-wide hop budget.
inline Network load_topology(const std::vector<detail::Line>& lines,
                             WorldTree world) {
  struct Row {
    int line_no;
    NodeId id;
    RegionId managed;
    std::optional<NodeId> parent;
    std::map<RegionId, NodeId> known;
  };
  std::vector<Row> rows;
  int hop_limit = 32;
  for (const auto& line : lines) {
    std::string body = detail::strip_comment(line.text);
    if (body.empty()) continue;
    auto toks = detail::split_ws(body);
    if (toks[0] == "hop_limit") {
      if (toks.size() != 2) {
        throw LoadError(detail::at_line(line.no, "expected 'hop_limit <n>'"));
      }
      hop_limit = static_cast<int>(detail::parse_int(toks[1], line.no,
                                                     "hop_limit"));
      continue;
    }
    if (toks.size() != 4) {
      throw LoadError(detail::at_line(
          line.no, "expected 'node_id region parent|- known|-'"));
    }
    Row row;
    row.line_no = line.no;
    row.id = toks[0];
    row.managed = toks[1];
    if (toks[2] != "-") row.parent = toks[2];
    if (toks[3] != "-") {
      for (const auto& entry : detail::split_csv(toks[3])) {
        auto eq = entry.find('=');
        if (eq == std::string::npos) {
          throw LoadError(detail::at_line(
              line.no, "known entry must be region=node, got '" + entry + "'"));
        }
        row.known[entry.substr(0, eq)] = entry.substr(eq + 1);
      }
    }
    rows.push_back(std::move(row));
  }

  Network net(std::move(world), hop_limit);
  for (auto& row : rows) {
    try {
      net.add_node(row.id, row.managed, row.parent, row.known);
    } catch (const LoadError& e) {
      throw LoadError(detail::at_line(row.line_no, e.what()));
    }
  }
  net.finalize();
  return net;
}

inline Network load_topology(std::istream& in, WorldTree world) {
  return load_topology(detail::read_lines(in), std::move(world));
}

}  // namespace gloss
