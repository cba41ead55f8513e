#pragma once

#include <map>
#include <optional>

#include "gloss/error.hpp"
#include "gloss/types.hpp"

namespace gloss {

struct CacheEntry {
  Profile profile;
  Tick fetched_at = 0;
  Tick ttl = 0;  // logical ticks, > 0
};

/// Time-to-live per hierarchy depth. Nodes near the root cache longest;
/// the table must be non-increasing with depth and clamps beyond its last
/// entry.
class CachePolicy {
public:
  CachePolicy() : CachePolicy({{0, 3600}, {1, 600}, {2, 120}, {3, 60}}) {}

  explicit CachePolicy(std::map<int, Tick> ttl_by_depth)
      : ttl_by_depth_(std::move(ttl_by_depth)) {
    if (ttl_by_depth_.empty()) {
      throw LoadError("cache policy must configure at least one depth");
    }
    Tick prev = 0;
    bool first = true;
    for (const auto& [depth, ttl] : ttl_by_depth_) {
      if (depth < 0) throw LoadError("cache policy depth must be >= 0");
      if (ttl <= 0) throw LoadError("cache policy ttl must be > 0");
      if (!first && ttl > prev) {
        throw LoadError("cache policy ttl must be non-increasing with depth");
      }
      prev = ttl;
      first = false;
    }
  }

  /// TTL at the given depth; depths beyond the table use its last entry.
  Tick ttl_for(int depth) const {
    auto it = ttl_by_depth_.upper_bound(depth);
    if (it == ttl_by_depth_.begin()) {
      return it->second;  // depth above the shallowest configured entry
    }
    return std::prev(it)->second;
  }

  const std::map<int, Tick>& table() const { return ttl_by_depth_; }

private:
  std::map<int, Tick> ttl_by_depth_;
};

inline Tick ttl_for(const CachePolicy& policy, int depth) {
  return policy.ttl_for(depth);
}

/// Per-node profile cache. An entry is fresh while now - fetched_at <= ttl.
class ProfileCache {
public:
  const Profile* lookup_fresh(const UserId& user, Tick now) const {
    auto it = entries_.find(user);
    if (it == entries_.end()) return nullptr;
    if (now - it->second.fetched_at > it->second.ttl) return nullptr;
    return &it->second.profile;
  }

  bool has_entry(const UserId& user) const {
    return entries_.count(user) != 0;
  }

  void install(Profile profile, Tick now, Tick ttl) {
    if (ttl <= 0) throw InternalError("cache entry ttl must be > 0");
    UserId user = profile.user;
    entries_[std::move(user)] = CacheEntry{std::move(profile), now, ttl};
  }

  /// Removes stale entries; returns how many were evicted.
  std::size_t expire(Tick now) {
    std::size_t evicted = 0;
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (now - it->second.fetched_at > it->second.ttl) {
        it = entries_.erase(it);
        ++evicted;
      } else {
        ++it;
      }
    }
    return evicted;
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<UserId, CacheEntry>& entries() const { return entries_; }

private:
  std::map<UserId, CacheEntry> entries_;
};

}  // namespace gloss
