#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gloss/error.hpp"

namespace gloss {

using RegionId = std::string;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool is_finite(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon);
}

/// True when the point is a real-world coordinate. Region machinery only
/// needs finite values; device adapters and the distance filter insist on
/// this stricter range.
inline bool is_geographic(const GeoPoint& p) {
  return is_finite(p) && p.lat >= -90.0 && p.lat < 90.0 && p.lon >= -180.0 &&
         p.lon < 180.0;
}

/// Axis-aligned rectangle, half-open on both axes: a point on the upper
/// latitude or longitude edge belongs to the neighbouring rectangle.
struct Rect {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool valid() const {
    return std::isfinite(lat_min) && std::isfinite(lat_max) &&
           std::isfinite(lon_min) && std::isfinite(lon_max) &&
           lat_min < lat_max && lon_min < lon_max;
  }

  bool contains(const GeoPoint& p) const {
    return p.lat >= lat_min && p.lat < lat_max && p.lon >= lon_min &&
           p.lon < lon_max;
  }

  bool contains(const Rect& r) const {
    return r.lat_min >= lat_min && r.lat_max <= lat_max &&
           r.lon_min >= lon_min && r.lon_max <= lon_max;
  }

  bool intersects(const Rect& r) const {
    return lat_min < r.lat_max && r.lat_min < lat_max && lon_min < r.lon_max &&
           r.lon_min < lon_max;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Region {
  RegionId id;
  Rect bounds;
  std::optional<RegionId> parent;
  std::vector<RegionId> children;  // in insertion order
  int depth = 0;                   // root = 0
};

/// One input line of a world description: parent empty means root.
struct RegionRecord {
  RegionId id;
  std::optional<RegionId> parent;
  Rect bounds;
};

/// The hierarchical "where" space. Immutable after construction; all
/// operations on it are pure and safe for concurrent readers.
class WorldTree {
public:
  static WorldTree build(const std::vector<RegionRecord>& records) {
    WorldTree w;
    for (const auto& rec : records) {
      if (w.regions_.count(rec.id) != 0) {
        throw LoadError("duplicate region id '" + rec.id + "'");
      }
      if (!rec.bounds.valid()) {
        throw LoadError("region '" + rec.id + "' has degenerate bounds");
      }
      Region r;
      r.id = rec.id;
      r.bounds = rec.bounds;
      r.parent = rec.parent;
      w.regions_.emplace(rec.id, std::move(r));
    }
    w.link_and_validate();
    return w;
  }

  const RegionId& root() const { return root_; }

  const std::map<RegionId, Region>& regions() const { return regions_; }

  const Region* find(const RegionId& id) const {
    auto it = regions_.find(id);
    return it == regions_.end() ? nullptr : &it->second;
  }

  const Region& at(const RegionId& id) const {
    const Region* r = find(id);
    if (r == nullptr) {
      throw InternalError("unknown region id '" + id + "'");
    }
    return *r;
  }

  int max_depth() const { return max_depth_; }

private:
  WorldTree() = default;

  void link_and_validate() {
    if (regions_.empty()) {
      throw LoadError("world has no regions");
    }
    std::vector<RegionId> roots;
    for (auto& [id, r] : regions_) {
      if (!r.parent.has_value()) {
        roots.push_back(id);
        continue;
      }
      auto pit = regions_.find(*r.parent);
      if (pit == regions_.end()) {
        throw LoadError("region '" + id + "' names unknown parent '" +
                        *r.parent + "'");
      }
      if (!pit->second.bounds.contains(r.bounds)) {
        throw LoadError("region '" + id + "' escapes the bounds of parent '" +
                        *r.parent + "'");
      }
      pit->second.children.push_back(id);
    }
    if (roots.size() != 1) {
      std::string msg = "world must have exactly one root region, found " +
                        std::to_string(roots.size());
      for (const auto& id : roots) msg += " '" + id + "'";
      throw LoadError(msg);
    }
    root_ = roots.front();

    // Sibling bounds must be pairwise disjoint.
    for (const auto& [id, r] : regions_) {
      for (std::size_t i = 0; i < r.children.size(); ++i) {
        for (std::size_t j = i + 1; j < r.children.size(); ++j) {
          const Region& a = regions_.at(r.children[i]);
          const Region& b = regions_.at(r.children[j]);
          if (a.bounds.intersects(b.bounds)) {
            throw LoadError("sibling regions '" + a.id + "' and '" + b.id +
                            "' overlap");
          }
        }
      }
    }

    // Depth assignment doubles as the reachability check: a parent cycle
    // leaves its members unvisited.
    std::vector<RegionId> queue{root_};
    std::size_t visited = 0;
    regions_.at(root_).depth = 0;
    while (!queue.empty()) {
      RegionId id = queue.back();
      queue.pop_back();
      ++visited;
      const Region& r = regions_.at(id);
      max_depth_ = std::max(max_depth_, r.depth);
      for (const auto& c : r.children) {
        regions_.at(c).depth = r.depth + 1;
        queue.push_back(c);
      }
    }
    if (visited != regions_.size()) {
      for (const auto& [id, r] : regions_) {
        if (id != root_ && r.depth == 0) {
          throw LoadError("region '" + id + "' is not reachable from root '" +
                          root_ + "'");
        }
      }
    }
  }

  std::map<RegionId, Region> regions_;
  RegionId root_;
  int max_depth_ = 0;
};

inline bool contains(const Region& region, const GeoPoint& p) {
  return region.bounds.contains(p);
}

/// Deepest region containing p, found by descending from the root. A point
/// inside a parent but in no child resolves to the parent. Empty when the
/// root does not contain p.
inline std::optional<RegionId> resolve_deepest(const WorldTree& world,
                                               const GeoPoint& p) {
  const Region* cur = &world.at(world.root());
  if (!contains(*cur, p)) {
    return std::nullopt;
  }
  for (;;) {
    const Region* next = nullptr;
    for (const auto& cid : cur->children) {
      const Region& c = world.at(cid);
      if (contains(c, p)) {
        next = &c;
        break;  // siblings are disjoint, so at most one child matches
      }
    }
    if (next == nullptr) {
      return cur->id;
    }
    cur = next;
  }
}

/// Root-to-deepest chain of regions containing p. Empty iff p is outside
/// the world.
inline std::vector<RegionId> region_path(const WorldTree& world,
                                         const GeoPoint& p) {
  std::vector<RegionId> path;
  const Region* cur = &world.at(world.root());
  if (!contains(*cur, p)) {
    return path;
  }
  for (;;) {
    path.push_back(cur->id);
    const Region* next = nullptr;
    for (const auto& cid : cur->children) {
      const Region& c = world.at(cid);
      if (contains(c, p)) {
        next = &c;
        break;
      }
    }
    if (next == nullptr) {
      return path;
    }
    cur = next;
  }
}

/// True when 'ancestor' is a strict ancestor of 'id' in the tree.
inline bool is_ancestor(const WorldTree& world, const RegionId& ancestor,
                        const RegionId& id) {
  const Region* r = world.find(id);
  while (r != nullptr && r->parent.has_value()) {
    if (*r->parent == ancestor) {
      return true;
    }
    r = world.find(*r->parent);
  }
  return false;
}

inline bool in_subtree(const WorldTree& world, const RegionId& top,
                       const RegionId& id) {
  return top == id || is_ancestor(world, top, id);
}

/// Deepest region whose bounds fully contain the target rectangle.
inline std::optional<RegionId> deepest_container(const WorldTree& world,
                                                 const Rect& target) {
  const Region* cur = &world.at(world.root());
  if (!cur->bounds.contains(target)) {
    return std::nullopt;
  }
  for (;;) {
    const Region* next = nullptr;
    for (const auto& cid : cur->children) {
      const Region& c = world.at(cid);
      if (c.bounds.contains(target)) {
        next = &c;
        break;
      }
    }
    if (next == nullptr) {
      return cur->id;
    }
    cur = next;
  }
}

/// Identity on known region ids; empty for unknown ones.
inline std::optional<RegionId> deepest_container(const WorldTree& world,
                                                 const RegionId& target) {
  if (world.find(target) != nullptr) {
    return target;
  }
  return std::nullopt;
}

/// Ancestor of the containing chain at the given depth; the chain's last
/// element when it is shorter than depth+1.
inline std::optional<RegionId> ancestor_at_depth(const WorldTree& world,
                                                 const GeoPoint& p, int depth) {
  std::vector<RegionId> path = region_path(world, p);
  if (path.empty()) {
    return std::nullopt;
  }
  std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(depth),
                                          path.size() - 1);
  return path[idx];
}

/// Number of indices i where the depth-d ancestor region differs between
/// trace[i] and trace[i+1]. Empty when any point lies outside the world.
inline std::optional<std::size_t> transition_count(
    const WorldTree& world, std::span<const GeoPoint> trace, int depth) {
  if (depth < 0) {
    throw InternalError("transition_count: negative depth");
  }
  std::size_t count = 0;
  std::optional<RegionId> prev;
  for (const auto& p : trace) {
    std::optional<RegionId> a = ancestor_at_depth(world, p, depth);
    if (!a.has_value()) {
      return std::nullopt;
    }
    if (prev.has_value() && *prev != *a) {
      ++count;
    }
    prev = std::move(a);
  }
  return count;
}

/// Great-circle distance in metres on a sphere of radius 6 371 000 m.
inline double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEarthRadiusM = 6371000.0;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

namespace detail {

struct Line {
  int no = 0;
  std::string text;
};

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_csv(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      if (i > start) out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string strip_comment(std::string_view s) {
  auto pos = s.find('#');
  std::string_view body = pos == std::string_view::npos ? s : s.substr(0, pos);
  std::size_t b = 0;
  std::size_t e = body.size();
  while (b < e && std::isspace(static_cast<unsigned char>(body[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(body[e - 1]))) --e;
  return std::string(body.substr(b, e - b));
}

inline double parse_double(std::string_view tok, int line_no,
                           std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() ||
      !std::isfinite(v)) {
    throw LoadError(at_line(line_no, "bad " + std::string(what) + " '" +
                                         std::string(tok) + "'"));
  }
  return v;
}

inline long long parse_int(std::string_view tok, int line_no,
                           std::string_view what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw LoadError(at_line(line_no, "bad " + std::string(what) + " '" +
                                         std::string(tok) + "'"));
  }
  return v;
}

inline std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    lines.push_back({no, raw});
  }
  return lines;
}

}  // namespace detail

/// Parses world records: `id parent|- lat_min lat_max lon_min lon_max`,
/// one per line, '#' comments allowed.
inline std::vector<RegionRecord> parse_region_records(
    const std::vector<detail::Line>& lines) {
  std::vector<RegionRecord> records;
  for (const auto& line : lines) {
    std::string body = detail::strip_comment(line.text);
    if (body.empty()) continue;
    auto toks = detail::split_ws(body);
    if (toks.size() != 6) {
      throw LoadError(detail::at_line(
          line.no, "expected 'id parent lat_min lat_max lon_min lon_max'"));
    }
    RegionRecord rec;
    rec.id = toks[0];
    if (toks[1] != "-") rec.parent = toks[1];
    rec.bounds.lat_min = detail::parse_double(toks[2], line.no, "lat_min");
    rec.bounds.lat_max = detail::parse_double(toks[3], line.no, "lat_max");
    rec.bounds.lon_min = detail::parse_double(toks[4], line.no, "lon_min");
    rec.bounds.lon_max = detail::parse_double(toks[5], line.no, "lon_max");
    records.push_back(std::move(rec));
  }
  return records;
}

inline WorldTree load_world(std::istream& in) {
  return WorldTree::build(parse_region_records(detail::read_lines(in)));
}

inline WorldTree load_world(const std::string& text) {
  std::istringstream in(text);
  return load_world(in);
}

}  // namespace gloss
