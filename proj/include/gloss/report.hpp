#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gloss/error.hpp"
#include "gloss/pipeline.hpp"
#include "gloss/services.hpp"
#include "gloss/types.hpp"

namespace gloss {

enum class ReportFormat { Human, Machine };

/// Everything a simulation run measured. The machine serialization is
/// line-stable: identical runs produce identical bytes.
struct Report {
  std::string scenario_name;
  std::uint64_t seed = 0;
  Tick horizon = 0;
  bool cache_enabled = true;

  struct Delivery {
    Tick tick;
    UserId user;
    std::string hearsay_id;
    std::string channel;
  };
  std::vector<Delivery> deliveries;

  std::uint64_t envelopes_created = 0;
  std::uint64_t envelopes_delivered = 0;
  std::uint64_t envelopes_undeliverable = 0;
  std::uint64_t envelopes_inflight = 0;

  std::map<NodeId, std::uint64_t> node_processed;
  std::map<NodeId, int> node_depths;
  std::map<int, std::uint64_t> depth_processed;
  std::map<int, std::uint64_t> hop_histogram;  // delivered envelopes
  CacheStats cache;
  std::map<UserId, std::vector<std::uint64_t>> transitions;  // index = depth
  Counters counters;

  /// Internal consistency: every envelope accounted for, per-depth counts
  /// summing to per-node counts.
  void validate() const {
    if (envelopes_created != envelopes_delivered + envelopes_undeliverable +
                                 envelopes_inflight) {
      throw InternalError("report: envelope conservation violated");
    }
    std::uint64_t by_node = 0;
    std::uint64_t by_depth = 0;
    for (const auto& [id, n] : node_processed) by_node += n;
    for (const auto& [d, n] : depth_processed) by_depth += n;
    if (by_node != by_depth) {
      throw InternalError("report: per-depth traffic does not sum to total");
    }
  }
};

inline std::string report_emit(const Report& r, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Machine) {
    out << "gloss-report 1\n";
    out << "scenario " << r.scenario_name << " seed " << r.seed << " horizon "
        << r.horizon << " cache " << (r.cache_enabled ? "on" : "off") << "\n";
    out << "envelopes created " << r.envelopes_created << " delivered "
        << r.envelopes_delivered << " undeliverable "
        << r.envelopes_undeliverable << " inflight " << r.envelopes_inflight
        << "\n";
    out << "deliveries " << r.deliveries.size() << "\n";
    for (const auto& d : r.deliveries) {
      out << "delivery " << d.tick << " " << d.user << " " << d.hearsay_id
          << " " << d.channel << "\n";
    }
    for (const auto& [id, n] : r.node_processed) {
      auto dit = r.node_depths.find(id);
      out << "node " << id << " depth "
          << (dit == r.node_depths.end() ? -1 : dit->second) << " processed "
          << n << "\n";
    }
    for (const auto& [d, n] : r.depth_processed) {
      out << "depth " << d << " processed " << n << "\n";
    }
    for (const auto& [h, n] : r.hop_histogram) {
      out << "hops " << h << " count " << n << "\n";
    }
    std::map<int, std::pair<std::uint64_t, std::uint64_t>> cache_rows;
    for (const auto& [d, n] : r.cache.hits) cache_rows[d].first = n;
    for (const auto& [d, n] : r.cache.misses) cache_rows[d].second = n;
    for (const auto& [d, hm] : cache_rows) {
      out << "cache depth " << d << " hits " << hm.first << " misses "
          << hm.second << "\n";
    }
    for (const auto& [user, counts] : r.transitions) {
      for (std::size_t d = 0; d < counts.size(); ++d) {
        out << "transitions " << user << " depth " << d << " count "
            << counts[d] << "\n";
      }
    }
    for (const auto& [name, n] : r.counters) {
      out << "counter " << name << " " << n << "\n";
    }
    return out.str();
  }

  out << "scenario " << r.scenario_name << " (seed " << r.seed << ", horizon "
      << r.horizon << ", cache " << (r.cache_enabled ? "on" : "off") << ")\n";
  out << "envelopes: created " << r.envelopes_created << ", delivered "
      << r.envelopes_delivered << ", undeliverable "
      << r.envelopes_undeliverable << ", in-flight " << r.envelopes_inflight
      << "\n";
  out << "\ndeliveries (" << r.deliveries.size() << "):\n";
  for (const auto& d : r.deliveries) {
    out << "  tick " << d.tick << "  user " << d.user << "  hearsay "
        << d.hearsay_id << "  via " << d.channel << "\n";
  }
  out << "\ntraffic by node:\n";
  for (const auto& [id, n] : r.node_processed) {
    auto dit = r.node_depths.find(id);
    out << "  " << id << " (depth "
        << (dit == r.node_depths.end() ? -1 : dit->second) << "): " << n
        << "\n";
  }
  out << "\ntraffic by depth:\n";
  for (const auto& [d, n] : r.depth_processed) {
    out << "  depth " << d << ": " << n << "\n";
  }
  out << "\nhop histogram (delivered envelopes):\n";
  for (const auto& [h, n] : r.hop_histogram) {
    out << "  " << h << " hops: " << n << "\n";
  }
  out << "\ncache by depth (hits/misses):\n";
  {
    std::map<int, std::pair<std::uint64_t, std::uint64_t>> cache_rows;
    for (const auto& [d, n] : r.cache.hits) cache_rows[d].first = n;
    for (const auto& [d, n] : r.cache.misses) cache_rows[d].second = n;
    for (const auto& [d, hm] : cache_rows) {
      out << "  depth " << d << ": " << hm.first << "/" << hm.second << "\n";
    }
  }
  out << "\nregion transitions per user (by ancestor depth):\n";
  for (const auto& [user, counts] : r.transitions) {
    out << "  " << user << ":";
    for (std::size_t d = 0; d < counts.size(); ++d) {
      out << " d" << d << "=" << counts[d];
    }
    out << "\n";
  }
  out << "\ncounters:\n";
  for (const auto& [name, n] : r.counters) {
    out << "  " << name << ": " << n << "\n";
  }
  return out.str();
}

}  // namespace gloss
