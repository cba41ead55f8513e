#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "gloss/geo.hpp"
#include "gloss/overlay.hpp"

// Reference implementations that answer the same questions as the library
// by exhaustive scan or graph search instead of tree descent and routing
// rules. Tests and `gloss oracle` cross-check against these; nothing in the
// delivery path may call them.
namespace gloss::oracle {

/// Deepest region containing p, by scanning every region.
inline std::optional<RegionId> scan_deepest(const WorldTree& world,
                                            const GeoPoint& p) {
  const Region* best = nullptr;
  for (const auto& [id, region] : world.regions()) {
    if (!region.bounds.contains(p)) continue;
    if (best == nullptr || region.depth > best->depth) best = &region;
  }
  if (best == nullptr) return std::nullopt;
  return best->id;
}

/// Containing chain, recovered by depth-sorting every containing region.
/// Sibling disjointness makes the chain unique.
inline std::vector<RegionId> scan_path(const WorldTree& world,
                                       const GeoPoint& p) {
  std::vector<const Region*> containing;
  for (const auto& [id, region] : world.regions()) {
    if (region.bounds.contains(p)) containing.push_back(&region);
  }
  std::sort(containing.begin(), containing.end(),
            [](const Region* a, const Region* b) { return a->depth < b->depth; });
  std::vector<RegionId> path;
  path.reserve(containing.size());
  for (const Region* r : containing) path.push_back(r->id);
  return path;
}

/// Deepest region whose bounds fully contain the rectangle, by scan.
inline std::optional<RegionId> scan_container(const WorldTree& world,
                                              const Rect& target) {
  const Region* best = nullptr;
  for (const auto& [id, region] : world.regions()) {
    if (!region.bounds.contains(target)) continue;
    if (best == nullptr || region.depth > best->depth) best = &region;
  }
  if (best == nullptr) return std::nullopt;
  return best->id;
}

inline std::optional<RegionId> scan_ancestor_at_depth(const WorldTree& world,
                                                      const GeoPoint& p,
                                                      int depth) {
  std::vector<RegionId> path = scan_path(world, p);
  if (path.empty()) return std::nullopt;
  std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(depth),
                                          path.size() - 1);
  return path[idx];
}

inline std::optional<std::size_t> scan_transition_count(
    const WorldTree& world, std::span<const GeoPoint> trace, int depth) {
  std::size_t count = 0;
  std::optional<RegionId> prev;
  for (const auto& p : trace) {
    auto a = scan_ancestor_at_depth(world, p, depth);
    if (!a.has_value()) return std::nullopt;
    if (prev.has_value() && *prev != *a) ++count;
    prev = std::move(a);
  }
  return count;
}

/// Expected hearsay placement / delivery terminal for a target where: the
/// deepest owned region among the target and its ancestors, found by
/// scanning every owned region.
inline std::optional<NodeId> scan_owning_node(const Network& net,
                                              const RegionId& where) {
  if (net.world().find(where) == nullptr) return std::nullopt;
  const Region* best = nullptr;
  NodeId best_node;
  for (const auto& [region, node] : net.region_owner()) {
    if (!in_subtree(net.world(), region, where)) continue;
    const Region& r = net.world().at(region);
    if (best == nullptr || r.depth > best->depth) {
      best = &r;
      best_node = node;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best_node;
}

/// Shortest node path over undirected parent/child hierarchy edges, by
/// breadth-first search: the route a pure up-and-down climb takes. Peer
/// links are not hierarchy edges. Empty when unreachable.
inline std::vector<NodeId> bfs_path(const Network& net, const NodeId& from,
                                    const NodeId& to) {
  if (!net.has_node(from) || !net.has_node(to)) return {};
  std::map<NodeId, NodeId> came_from;
  std::set<NodeId> seen{from};
  std::deque<NodeId> queue{from};
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    if (cur == to) {
      std::vector<NodeId> path{cur};
      while (cur != from) {
        cur = came_from.at(cur);
        path.push_back(cur);
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    const OverlayNode& node = net.node(cur);
    std::vector<NodeId> next;
    if (node.parent.has_value()) next.push_back(*node.parent);
    for (const auto& [r, c] : node.children) next.push_back(c);
    for (const auto& n : next) {
      if (seen.insert(n).second) {
        came_from[n] = cur;
        queue.push_back(n);
      }
    }
  }
  return {};
}

/// Haversine distance restated step by step (atan2 form) as a cross-check
/// for the filter's distance computation. R = 6 371 000 m.
inline double haversine_reference_m(const GeoPoint& a, const GeoPoint& b) {
  const double radius = 6371000.0;
  const double pi = std::acos(-1.0);
  const double phi1 = a.lat * pi / 180.0;
  const double phi2 = b.lat * pi / 180.0;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon - a.lon) * pi / 180.0;
  const double h = std::pow(std::sin(dphi / 2.0), 2) +
                   std::cos(phi1) * std::cos(phi2) *
                       std::pow(std::sin(dlambda / 2.0), 2);
  const double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
  return radius * c;
}

}  // namespace gloss::oracle
