#pragma once

// Seeded random structure generators for property and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "gloss/gloss.hpp"

namespace gen {

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

namespace detail {

inline void subdivide(std::vector<gloss::RegionRecord>& records,
                      std::mt19937& rng, const gloss::RegionId& parent,
                      const gloss::Rect& bounds, int depth, int max_depth,
                      int max_fanout, int& counter) {
  if (depth >= max_depth) return;
  const int fanout = uniform_int(rng, 0, max_fanout);
  if (fanout == 0) return;
  const bool split_lat = depth % 2 == 0;
  const double lo = split_lat ? bounds.lat_min : bounds.lon_min;
  const double hi = split_lat ? bounds.lat_max : bounds.lon_max;
  // endpoints must be the parent's own bounds, not a rounded recomputation
  auto cut = [&](int j) {
    if (j == 0) return lo;
    if (j == fanout) return hi;
    return lo + (hi - lo) * j / fanout;
  };
  for (int i = 0; i < fanout; ++i) {
    double a = cut(i);
    double b = cut(i + 1);
    if (uniform_int(rng, 0, 3) == 0) {
      b = a + (b - a) * 0.7;  // leave a coverage gap inside the slice
    }
    gloss::Rect r = bounds;
    if (split_lat) {
      r.lat_min = a;
      r.lat_max = b;
    } else {
      r.lon_min = a;
      r.lon_max = b;
    }
    gloss::RegionId id = "r" + std::to_string(counter++);
    records.push_back({id, parent, r});
    subdivide(records, rng, id, r, depth + 1, max_depth, max_fanout, counter);
  }
}

}  // namespace detail

/// Random world of half-open rectangles: depth bounded, siblings disjoint
/// by construction, occasional coverage gaps.
inline gloss::WorldTree random_world(std::mt19937& rng, int max_depth = 5,
                                     int max_fanout = 4) {
  std::vector<gloss::RegionRecord> records;
  gloss::Rect root{0.0, 80.0, 0.0, 160.0};
  records.push_back({"root", std::nullopt, root});
  int counter = 0;
  detail::subdivide(records, rng, "root", root, 0, max_depth, max_fanout,
                    counter);
  return gloss::WorldTree::build(records);
}

/// Random node hierarchy over a world: the root region always gets a node,
/// other regions with probability own_prob; each node's parent is the node
/// of its nearest owned proper ancestor region.
inline gloss::Network random_network(std::mt19937& rng,
                                     const gloss::WorldTree& world,
                                     double own_prob = 0.7,
                                     int hop_limit = 64) {
  std::vector<gloss::RegionId> owned{world.root()};
  for (const auto& [id, region] : world.regions()) {
    if (id == world.root()) continue;
    if (uniform(rng, 0.0, 1.0) < own_prob) owned.push_back(id);
  }
  std::set<gloss::RegionId> owned_set(owned.begin(), owned.end());

  gloss::Network net(world, hop_limit);
  for (const auto& region : owned) {
    std::optional<gloss::NodeId> parent;
    const gloss::Region* r = &world.at(region);
    while (r->parent.has_value()) {
      if (owned_set.count(*r->parent) != 0) {
        parent = "n-" + *r->parent;
        break;
      }
      r = &world.at(*r->parent);
    }
    net.add_node("n-" + region, region, parent);
  }
  net.finalize();
  return net;
}

inline gloss::NodeId random_node(std::mt19937& rng, const gloss::Network& net) {
  const auto& nodes = net.nodes();
  int idx = uniform_int(rng, 0, static_cast<int>(nodes.size()) - 1);
  auto it = nodes.begin();
  std::advance(it, idx);
  return it->first;
}

inline gloss::RegionId random_owned_region(std::mt19937& rng,
                                           const gloss::Network& net) {
  const auto& owners = net.region_owner();
  int idx = uniform_int(rng, 0, static_cast<int>(owners.size()) - 1);
  auto it = owners.begin();
  std::advance(it, idx);
  return it->first;
}

inline gloss::RegionId random_region(std::mt19937& rng,
                                     const gloss::WorldTree& world) {
  const auto& regions = world.regions();
  int idx = uniform_int(rng, 0, static_cast<int>(regions.size()) - 1);
  auto it = regions.begin();
  std::advance(it, idx);
  return it->first;
}

/// Sprinkles valid shortcut entries (region -> its owning node) over random
/// nodes.
inline void inject_random_known(std::mt19937& rng, gloss::Network& net,
                                int count) {
  std::vector<gloss::NodeId> ids;
  for (const auto& [id, node] : net.nodes()) ids.push_back(id);
  for (int i = 0; i < count; ++i) {
    const gloss::NodeId& at = ids[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(ids.size()) - 1))];
    gloss::RegionId region = random_owned_region(rng, net);
    gloss::NodeId owner = *net.owner_of(region);
    if (owner == at) continue;
    net.node(at).known[region] = owner;
  }
}

/// Mobility trace inside the world's root bounds: mostly small steps with
/// occasional jumps.
inline std::vector<gloss::GeoPoint> random_trace(std::mt19937& rng,
                                                 const gloss::WorldTree& world,
                                                 std::size_t n) {
  const gloss::Rect& b = world.at(world.root()).bounds;
  std::vector<gloss::GeoPoint> trace;
  trace.reserve(n);
  gloss::GeoPoint p{uniform(rng, b.lat_min, b.lat_max),
                    uniform(rng, b.lon_min, b.lon_max)};
  auto clamp = [](double v, double lo, double hi) {
    if (v < lo) return lo;
    if (v >= hi) return std::nextafter(hi, lo);
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    trace.push_back(p);
    if (uniform(rng, 0.0, 1.0) < 0.1) {
      p = {uniform(rng, b.lat_min, b.lat_max),
           uniform(rng, b.lon_min, b.lon_max)};
    } else {
      const double step_lat = (b.lat_max - b.lat_min) * 0.02;
      const double step_lon = (b.lon_max - b.lon_min) * 0.02;
      p.lat = clamp(p.lat + uniform(rng, -step_lat, step_lat), b.lat_min,
                    b.lat_max);
      p.lon = clamp(p.lon + uniform(rng, -step_lon, step_lon), b.lon_min,
                    b.lon_max);
    }
  }
  return trace;
}

}  // namespace gen
