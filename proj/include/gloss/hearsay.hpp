#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gloss/events.hpp"
#include "gloss/types.hpp"

namespace gloss {

/// Delivery is restricted to users whose profile carries every required
/// tag. An empty requirement matches everyone.
struct ProfilePredicate {
  std::set<std::string> required_tags;
};

inline bool matches(const Profile& profile, const ProfilePredicate& pred) {
  for (const auto& tag : pred.required_tags) {
    if (profile.tags.count(tag) == 0) return false;
  }
  return true;
}

/// A note bound to a where and a predicate: delivered to matching users on
/// entry into that where.
struct HearsayRecord {
  std::string hearsay_id;
  RegionId where;
  ProfilePredicate predicate;
  std::string info;
  UserId depositor;
  Tick inserted_at = 0;
};

/// A notice that could not be sent over any channel; kept for the user's
/// next entry event.
struct PendingNotice {
  HearsayNoticePayload notice;
  int retry_count = 0;
};

/// Per-node hearsay state. Every stored record's where must be the owning
/// node's managed region or a descendant of it; the insert path asserts
/// this.
struct HearsayStore {
  std::map<std::string, HearsayRecord> records;
  std::set<std::pair<std::string, UserId>> delivered;
  std::map<UserId, std::vector<PendingNotice>> pending;
};

}  // namespace gloss
