#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gloss/hearsay.hpp"
#include "gloss/overlay.hpp"
#include "gloss/profile_cache.hpp"

namespace gloss {

struct InsertResult {
  enum class Status { Ok, UnknownWhere, Undeliverable };
  Status status = Status::Ok;
  NodeId placed_at;
  DeliveryTrace trace;
};

/// Routes a hearsay record toward its delivery where and stores it on the
/// terminal node: the where's own node when one exists, otherwise the node
/// managing the closest containing region.
inline InsertResult hearsay_insert(Network& net, const NodeId& origin,
                                   HearsayRecord record, std::string msg_id,
                                   RouteObserver* observer = nullptr) {
  InsertResult result;
  if (net.world().find(record.where) == nullptr) {
    result.status = InsertResult::Status::UnknownWhere;
    return result;
  }
  MessageEnvelope env;
  env.msg_id = std::move(msg_id);
  env.target = record.where;
  GenericPayload payload;
  payload.element = "hearsay-insert";
  payload.attrs["id"] = record.hearsay_id;
  payload.attrs["where"] = record.where;
  payload.attrs["tags"] = detail::join(record.predicate.required_tags, ',');
  payload.attrs["info"] = record.info;
  payload.attrs["depositor"] = record.depositor;
  env.payload = make_event(std::move(payload));
  env.origin = origin;

  result.trace = deliver(net, origin, std::move(env), observer);
  if (result.trace.status != DeliveryStatus::Delivered) {
    result.status = InsertResult::Status::Undeliverable;
    return result;
  }

  OverlayNode& node = net.node(*result.trace.delivered_at);
  if (!in_subtree(net.world(), node.managed, record.where)) {
    throw InternalError("hearsay '" + record.hearsay_id +
                        "' landed on node '" + node.id +
                        "' outside its where '" + record.where + "'");
  }
  if (node.hearsay.records.count(record.hearsay_id) != 0) {
    throw LoadError("duplicate hearsay id '" + record.hearsay_id + "'");
  }
  result.placed_at = node.id;
  node.hearsay.records.emplace(record.hearsay_id, std::move(record));
  return result;
}

/// Resolves a profile for matching; empty means unavailable. The node id
/// is the requester (the node where matching runs) and `now` drives cache
/// freshness.
using ProfileAccess =
    std::function<std::optional<Profile>(const NodeId&, const UserId&, Tick)>;

struct MatchAuditEntry {
  NodeId node;
  std::string hearsay_id;
  UserId user;
  bool matched = false;
};

struct EnterResult {
  std::vector<HearsayNoticePayload> notices;
  bool profile_ok = true;
};

/// Runs hearsay matching on the node that received an enter-where event.
/// A stored record fires when its where is the entered region or an
/// ancestor of it, the profile matches, and the (hearsay, user) pair has
/// not fired before.
inline EnterResult hearsay_on_enter(Network& net, const NodeId& node_id,
                                    const UserId& user, const RegionId& where,
                                    Tick now, const ProfileAccess& profiles,
                                    std::vector<MatchAuditEntry>* audit =
                                        nullptr) {
  EnterResult result;
  OverlayNode& node = net.node(node_id);
  std::optional<Profile> profile = profiles(node_id, user, now);
  if (!profile.has_value()) {
    result.profile_ok = false;
    return result;
  }
  for (const auto& [id, record] : node.hearsay.records) {
    if (!(record.where == where ||
          is_ancestor(net.world(), record.where, where))) {
      continue;
    }
    const bool matched = matches(*profile, record.predicate);
    if (audit != nullptr) audit->push_back({node_id, id, user, matched});
    if (!matched) continue;
    if (node.hearsay.delivered.count({id, user}) != 0) continue;
    node.hearsay.delivered.insert({id, user});
    result.notices.push_back({id, record.info, user});
  }
  return result;
}

/// One contact technology: scripted availability plus a send hook that
/// reports whether the notice reached the user.
struct Channel {
  bool up = true;
  std::function<bool(const HearsayNoticePayload&)> send;
};

using ChannelRegistry = std::map<std::string, Channel>;

struct NotifyResult {
  bool delivered = false;
  std::string channel;  // the channel that succeeded
};

/// Tries the profile's contact methods in order; the first channel that is
/// up and accepts the notice wins.
inline NotifyResult hearsay_notify(const Profile& profile,
                                   const HearsayNoticePayload& notice,
                                   ChannelRegistry& channels) {
  for (const auto& contact : profile.contacts) {
    auto it = channels.find(contact);
    if (it == channels.end() || !it->second.up) continue;
    if (it->second.send && it->second.send(notice)) {
      return {true, contact};
    }
  }
  return {false, {}};
}

enum class FetchStatus { Ok, UnknownUser, Undeliverable };

struct FetchResult {
  FetchStatus status = FetchStatus::Ok;
  Profile profile;
  std::vector<NodeId> path;  // empty on a requester-local answer
  NodeId answered_by;
  bool cache_hit = false;    // answered from a cache rather than home
  int request_hops = 0;
  int reply_hops = 0;
};

/// Per-depth cache consultation counts.
struct CacheStats {
  std::map<int, std::uint64_t> hits;
  std::map<int, std::uint64_t> misses;
};

/// Fetches a user's profile for a requesting node. A fresh local entry
/// answers immediately; otherwise a request routes toward the home node,
/// any intermediate fresh cache replies early, and the reply retraces the
/// request path installing a depth-governed cache entry at every node it
/// passes. With use_cache false the request always runs end-to-end and
/// installs nothing.
inline FetchResult profile_fetch(Network& net, const NodeId& requester,
                                 const UserId& user, Tick now,
                                 const CachePolicy& policy, bool use_cache,
                                 std::string msg_id,
                                 RouteObserver* observer = nullptr,
                                 CacheStats* stats = nullptr) {
  FetchResult result;
  auto home = net.home_of(user);
  if (!home.has_value()) {
    result.status = FetchStatus::UnknownUser;
    return result;
  }
  OverlayNode& req_node = net.node(requester);

  if (use_cache) {
    if (const Profile* p = req_node.cache.lookup_fresh(user, now)) {
      if (stats != nullptr) ++stats->hits[req_node.depth];
      result.profile = *p;
      result.answered_by = requester;
      result.cache_hit = true;
      return result;
    }
    if (stats != nullptr) ++stats->misses[req_node.depth];
  }
  if (requester == *home) {
    result.profile = req_node.home_profiles.at(user);
    result.answered_by = requester;
    return result;
  }

  MessageEnvelope env;
  env.msg_id = msg_id;
  env.target = net.node(*home).managed;
  env.payload = make_event(ProfileRequestPayload{user});
  env.origin = requester;

  DeliveryInterceptor reply_here = [&](const NodeId& at,
                                       const MessageEnvelope&) {
    if (at == requester) return false;  // already consulted above
    if (at == *home) return true;
    if (!use_cache) return false;
    OverlayNode& n = net.node(at);
    if (n.cache.lookup_fresh(user, now) != nullptr) {
      if (stats != nullptr) ++stats->hits[n.depth];
      return true;
    }
    if (stats != nullptr) ++stats->misses[n.depth];
    return false;
  };

  DeliveryTrace trace =
      deliver(net, requester, std::move(env), observer, reply_here);
  if (trace.status != DeliveryStatus::Delivered) {
    result.status = FetchStatus::Undeliverable;
    return result;
  }
  const NodeId replier = *trace.delivered_at;
  const Profile* answer = nullptr;
  if (replier == *home) {
    answer = &net.node(replier).home_profiles.at(user);
  } else {
    answer = net.node(replier).cache.lookup_fresh(user, now);
    if (answer == nullptr) {
      // Routing dead-ended somewhere that cannot answer.
      result.status = FetchStatus::Undeliverable;
      return result;
    }
    result.cache_hit = true;
  }
  result.profile = *answer;
  result.answered_by = replier;
  result.path = delivery_path(trace);
  result.request_hops = static_cast<int>(result.path.size()) - 1;

  // The reply retraces the request path so copies land at every level.
  MessageEnvelope reply;
  reply.msg_id = msg_id + "r";
  reply.target = req_node.managed;
  reply.payload = make_event(ProfileReplyPayload{user, result.profile});
  reply.origin = replier;
  for (std::size_t i = result.path.size(); i-- > 0;) {
    const NodeId& at = result.path[i];
    OverlayNode& n = net.node(at);
    if (at != replier) {
      reply.hops += 1;
      ++result.reply_hops;
      if (observer != nullptr) {
        observer->on_forward(result.path[i + 1], at, reply);
        observer->on_process(at, reply);
      }
      reply.visited.insert(at);
    }
    if (use_cache) {
      n.cache.install(result.profile, now, policy.ttl_for(n.depth));
    }
  }
  return result;
}

}  // namespace gloss
