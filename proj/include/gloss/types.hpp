#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace gloss {

using UserId = std::string;
using NodeId = std::string;

/// Logical simulation time. All latencies are one tick per hop.
using Tick = std::int64_t;

/// A user's context record: interest tags, contact methods in preference
/// order, and the node that stores the authoritative copy.
struct Profile {
  UserId user;
  std::set<std::string> tags;
  std::vector<std::string> contacts;  // tried first to last
  NodeId home;

  friend bool operator==(const Profile&, const Profile&) = default;
};

}  // namespace gloss
