#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gloss/report.hpp"
#include "gloss/scenario.hpp"
#include "gloss/services.hpp"

namespace gloss {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  bool use_cache = true;
  std::ostream* trace = nullptr;
};

struct EnvelopeLogEntry {
  std::string msg_id;
  NodeId at;
  EventKind kind = EventKind::Generic;
  std::string xml;
};

/// Deterministic tick-driven replay of a scenario: scheduled device input
/// flows through conduit assemblies, uplinked locations enter the overlay
/// at the user's gateway, enter-where deliveries run hearsay matching, and
/// notices come back through the user's conduit. The network, match audit
/// and envelope log of the last run stay inspectable.
class Simulator {
public:
  explicit Simulator(Scenario scenario) : scenario_(std::move(scenario)) {}

  Report run(const RunOptions& options = {}) {
    options_ = options;
    report_ = Report{};
    report_.scenario_name = scenario_.name;
    report_.seed = options.seed.value_or(scenario_.seed);
    report_.horizon = scenario_.horizon;
    report_.cache_enabled = options.use_cache;
    rng_.seed(report_.seed);
    msg_counter_ = 0;
    hearsay_counter_ = 0;
    match_audit_.clear();
    envelope_log_.clear();
    user_points_.clear();

    network_.emplace(scenario_.build_network());
    for (const auto& [id, node] : network_->nodes()) {
      report_.node_depths[id] = node.depth;
    }

    conduits_.clear();
    for (const auto& spec : scenario_.conduits) {
      conduits_.emplace(spec.user, RuntimeConduit{&spec, assemble(spec.assembly)});
      user_points_[spec.user];  // every conduit user gets a transitions row
    }
    servers_.clear();
    for (const auto& spec : scenario_.servers) {
      servers_.emplace(spec.node, RuntimeServer{&spec, assemble(spec.assembly)});
    }

    channels_.clear();
    for (const auto& p : scenario_.profiles) {
      for (const auto& c : p.contacts) ensure_channel(c);
    }
    for (const auto& e : scenario_.schedule) {
      if (e.kind == ScheduleEntry::Kind::ChannelToggle) {
        ensure_channel(e.channel);
      }
    }

    Observer observer(*this);
    observer_ = &observer;

    std::size_t next_entry = 0;
    for (current_tick_ = 0; current_tick_ <= scenario_.horizon;
         ++current_tick_) {
      while (next_entry < scenario_.schedule.size() &&
             scenario_.schedule[next_entry].tick == current_tick_) {
        dispatch(scenario_.schedule[next_entry]);
        ++next_entry;
      }
    }
    observer_ = nullptr;

    const WorldTree& world = network_->world();
    for (const auto& [user, points] : user_points_) {
      auto& row = report_.transitions[user];
      for (int d = 0; d <= world.max_depth(); ++d) {
        auto c = transition_count(world, points, d);
        if (!c.has_value()) {
          throw InternalError("collected trace point outside world");
        }
        row.push_back(*c);
      }
    }

    for (auto& [user, rc] : conduits_) merge_counters(rc.assembly.counters());
    for (auto& [node, rs] : servers_) merge_counters(rs.assembly.counters());

    report_.validate();
    return report_;
  }

  // State of the most recent run, for inspection.
  const Network& network() const { return *network_; }
  const std::vector<MatchAuditEntry>& match_audit() const {
    return match_audit_;
  }
  const std::vector<EnvelopeLogEntry>& envelope_log() const {
    return envelope_log_;
  }
  Assembly* conduit_assembly(const UserId& user) {
    auto it = conduits_.find(user);
    return it == conduits_.end() ? nullptr : &it->second.assembly;
  }

private:
  struct RuntimeConduit {
    const ConduitSpec* spec;
    Assembly assembly;
  };
  struct RuntimeServer {
    const ServerSpec* spec;
    Assembly assembly;
  };

  class Observer : public RouteObserver {
  public:
    explicit Observer(Simulator& sim) : sim_(sim) {}
    void on_process(const NodeId& node, const MessageEnvelope& env) override {
      ++sim_.report_.node_processed[node];
      ++sim_.report_.depth_processed[sim_.report_.node_depths.at(node)];
      sim_.envelope_log_.push_back(
          {env.msg_id, node, env.payload.kind(), to_xml(env.payload)});
    }

  private:
    Simulator& sim_;
  };

  std::string next_msg_id() { return "m" + std::to_string(++msg_counter_); }

  void ensure_channel(const std::string& name) {
    if (channels_.count(name) != 0) return;
    channels_[name] = Channel{
        true, [this, name](const HearsayNoticePayload& notice) {
          return channel_send(name, notice);
        }};
  }

  bool channel_send(const std::string& channel,
                    const HearsayNoticePayload& notice) {
    auto it = conduits_.find(notice.recipient);
    if (it == conduits_.end()) return false;
    RuntimeConduit& rc = it->second;
    if (rc.spec->device_sources.count(channel) == 0) return false;
    Event e = make_event(notice);
    trace_event(e);
    rc.assembly.inject(channel, std::move(e), current_tick_);
    return true;
  }

  void merge_counters(const Counters& counters) {
    for (const auto& [name, n] : counters) report_.counters[name] += n;
  }

  void trace_event(const Event& e) {
    if (options_.trace != nullptr) {
      *options_.trace << "event " << to_xml(e) << "\n";
    }
  }

  void trace_route(const std::string& msg_id, const DeliveryTrace& trace) {
    if (options_.trace == nullptr) return;
    *options_.trace << "route " << msg_id << " "
                    << (trace.status == DeliveryStatus::Delivered
                            ? "delivered"
                            : "undeliverable");
    for (const auto& n : trace.order) *options_.trace << " " << n;
    *options_.trace << "\n";
  }

  NodeId default_origin(const UserId& depositor) const {
    const ConduitSpec* conduit = scenario_.conduit_for(depositor);
    if (conduit != nullptr) return conduit->gateway;
    return scenario_.first_node;
  }

  void dispatch(const ScheduleEntry& entry) {
    switch (entry.kind) {
      case ScheduleEntry::Kind::Nmea: {
        RuntimeConduit& rc = conduits_.at(entry.user);
        Event raw = make_event(RawPayload{entry.raw_line});
        trace_event(raw);
        auto hits = rc.assembly.inject(rc.spec->gps_source, std::move(raw),
                                       current_tick_);
        for (const auto& hit : hits) {
          if (hit.sink == rc.spec->uplink_sink &&
              hit.event.kind() == EventKind::Location) {
            trace_event(hit.event);
            do_ingress(entry.user, hit.event.as<LocationPayload>());
          }
        }
        break;
      }
      case ScheduleEntry::Kind::HearsayInsert: {
        HearsayRecord record;
        record.hearsay_id = "h" + std::to_string(++hearsay_counter_);
        record.where = entry.where;
        record.predicate.required_tags = entry.required_tags;
        record.info = entry.info;
        record.depositor = entry.depositor;
        record.inserted_at = current_tick_;
        const std::string msg_id = next_msg_id();
        InsertResult res = hearsay_insert(*network_, default_origin(entry.depositor),
                                          std::move(record), msg_id, observer_);
        ++report_.envelopes_created;
        if (res.status == InsertResult::Status::Ok) {
          ++report_.envelopes_delivered;
          ++report_.hop_histogram[res.trace.delivered_hops];
        } else {
          ++report_.envelopes_undeliverable;
          ++report_.counters["envelopes.undeliverable"];
        }
        trace_route(msg_id, res.trace);
        break;
      }
      case ScheduleEntry::Kind::ChannelToggle:
        channels_[entry.channel].up = entry.channel_up;
        break;
    }
  }

  void do_ingress(const UserId& user, const LocationPayload& location) {
    const std::string msg_id = next_msg_id();
    IngressResult result = ingress(*network_, conduits_.at(user).spec->gateway,
                                   location, msg_id, observer_);
    if (result.status == IngressResult::Status::OutsideWorld) {
      ++report_.counters["ingress.outside_world"];
      return;
    }
    user_points_[user].push_back(location.point);
    ++report_.envelopes_created;
    trace_route(msg_id, result.trace);
    if (result.trace.status != DeliveryStatus::Delivered) {
      ++report_.envelopes_undeliverable;
      ++report_.counters["envelopes.undeliverable"];
      return;
    }
    ++report_.envelopes_delivered;
    ++report_.hop_histogram[result.trace.delivered_hops];
    handle_enter(*result.trace.delivered_at, user, result.target, location.t);
  }

  void handle_enter(const NodeId& node, const UserId& user,
                    const RegionId& where, Tick t) {
    auto sit = servers_.find(node);
    if (sit != servers_.end()) {
      Event e = make_event(EnterWherePayload{user, where, t});
      auto hits =
          sit->second.assembly.inject(sit->second.spec->inlet, std::move(e), t);
      report_.counters["server.sink_hits"] += hits.size();
    }

    std::optional<Profile> profile = fetch_profile(node, user, t);
    if (!profile.has_value()) {
      ++report_.counters["hearsay.profile_unavailable"];
      return;
    }
    EnterResult entered = hearsay_on_enter(
        *network_, node, user, where, t,
        [&profile](const NodeId&, const UserId&, Tick) { return profile; },
        &match_audit_);

    auto& store = network_->node(node).hearsay;
    std::vector<PendingNotice> attempts;
    auto pit = store.pending.find(user);
    if (pit != store.pending.end()) {
      attempts = std::move(pit->second);
      store.pending.erase(pit);
    }
    for (auto& notice : entered.notices) attempts.push_back({notice, 0});

    for (auto& attempt : attempts) {
      NotifyResult sent = hearsay_notify(*profile, attempt.notice, channels_);
      if (sent.delivered) {
        report_.deliveries.push_back(
            {t, user, attempt.notice.hearsay_id, sent.channel});
      } else {
        attempt.retry_count += 1;
        ++report_.counters["notify.all_channels_failed"];
        store.pending[user].push_back(std::move(attempt));
      }
    }
  }

  std::optional<Profile> fetch_profile(const NodeId& requester,
                                       const UserId& user, Tick now) {
    const std::string msg_id = next_msg_id();
    FetchResult fetched =
        profile_fetch(*network_, requester, user, now, scenario_.policy,
                      options_.use_cache, msg_id, observer_, &report_.cache);
    if (options_.trace != nullptr && fetched.status == FetchStatus::Ok &&
        !fetched.path.empty()) {
      *options_.trace << "route " << msg_id << " replied-by "
                      << fetched.answered_by;
      for (const auto& n : fetched.path) *options_.trace << " " << n;
      *options_.trace << "\n";
    }
    switch (fetched.status) {
      case FetchStatus::UnknownUser:
        ++report_.counters["profile.unknown_user"];
        return std::nullopt;
      case FetchStatus::Undeliverable:
        ++report_.envelopes_created;
        ++report_.envelopes_undeliverable;
        ++report_.counters["envelopes.undeliverable"];
        return std::nullopt;
      case FetchStatus::Ok:
        if (!fetched.path.empty()) {
          report_.envelopes_created += 2;  // request and reply
          report_.envelopes_delivered += 2;
          ++report_.hop_histogram[fetched.request_hops];
          ++report_.hop_histogram[fetched.reply_hops];
        }
        return fetched.profile;
    }
    return std::nullopt;
  }

  Scenario scenario_;
  RunOptions options_;
  Report report_;
  std::optional<Network> network_;
  std::map<UserId, RuntimeConduit> conduits_;
  std::map<NodeId, RuntimeServer> servers_;
  ChannelRegistry channels_;
  std::map<UserId, std::vector<GeoPoint>> user_points_;
  std::vector<MatchAuditEntry> match_audit_;
  std::vector<EnvelopeLogEntry> envelope_log_;
  RouteObserver* observer_ = nullptr;
  std::mt19937_64 rng_;
  std::uint64_t msg_counter_ = 0;
  std::uint64_t hearsay_counter_ = 0;
  Tick current_tick_ = 0;
};

}  // namespace gloss
