#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gloss/error.hpp"
#include "gloss/geo.hpp"
#include "gloss/overlay.hpp"
#include "gloss/pipeline.hpp"
#include "gloss/profile_cache.hpp"

namespace gloss {

struct ScheduleEntry {
  enum class Kind { Nmea, HearsayInsert, ChannelToggle };
  Kind kind = Kind::Nmea;
  Tick tick = 0;
  int line_no = 0;
  // nmea
  UserId user;
  std::string raw_line;
  // hearsay insertion
  UserId depositor;
  RegionId where;
  std::set<std::string> required_tags;
  std::string info;
  // channel toggle
  std::string channel;
  bool channel_up = true;
};

struct ConduitSpec {
  UserId user;
  NodeId gateway;
  AssemblySpec assembly;
  std::string gps_source;   // source taking raw device strings
  std::string uplink_sink;  // device sink whose locations go to the gateway
  std::set<std::string> device_sources;  // per-channel injection points
};

struct ServerSpec {
  NodeId node;
  AssemblySpec assembly;
  std::string inlet;  // source taking enter-where events
};

/// A fully cross-validated replayable scenario. Holds sources, not live
/// state: build_network() and assemble() produce fresh state per run.
struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  Tick horizon = 0;
  std::vector<RegionRecord> region_records;
  std::vector<detail::Line> topology_lines;
  NodeId first_node;  // default insertion origin for users without a conduit
  std::vector<Profile> profiles;
  CachePolicy policy;
  std::vector<ConduitSpec> conduits;
  std::vector<ServerSpec> servers;
  std::vector<ScheduleEntry> schedule;

  WorldTree build_world() const { return WorldTree::build(region_records); }

  Network build_network() const {
    Network net = load_topology(topology_lines, build_world());
    for (const auto& p : profiles) net.register_profile(p);
    return net;
  }

  const ConduitSpec* conduit_for(const UserId& user) const {
    for (const auto& c : conduits) {
      if (c.user == user) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string rest_after_tokens(const std::string& body, int n) {
  std::size_t i = 0;
  for (int t = 0; t < n; ++t) {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
      ++i;
    while (i < body.size() &&
           !std::isspace(static_cast<unsigned char>(body[i])))
      ++i;
  }
  while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
    ++i;
  return body.substr(i);
}

struct Section {
  std::string header;  // text inside the brackets
  int line_no = 0;
  std::vector<Line> lines;
};

inline std::vector<Section> split_sections(const std::vector<Line>& lines) {
  std::vector<Section> sections;
  for (const auto& line : lines) {
    std::string body = strip_comment(line.text);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw LoadError(at_line(line.no, "unterminated section header"));
      }
      Section s;
      s.header = body.substr(1, body.size() - 2);
      s.line_no = line.no;
      sections.push_back(std::move(s));
      continue;
    }
    if (sections.empty()) {
      throw LoadError(at_line(line.no, "content before any [section] header"));
    }
    sections.back().lines.push_back(line);
  }
  return sections;
}

inline std::set<std::string> parse_tags(std::string_view tok) {
  std::set<std::string> tags;
  if (tok == "-") return tags;
  for (const auto& t : split_csv(tok)) tags.insert(t);
  return tags;
}

}  // namespace detail

inline Scenario load_scenario(std::istream& in) {
  Scenario sc;
  auto sections = detail::split_sections(detail::read_lines(in));

  std::set<std::string> seen_headers;
  bool have_world = false;
  bool have_topology = false;
  std::vector<detail::Line> profile_lines;
  std::vector<detail::Line> schedule_lines;

  for (auto& section : sections) {
    auto head_toks = detail::split_ws(section.header);
    if (head_toks.empty()) {
      throw LoadError(detail::at_line(section.line_no, "empty section header"));
    }
    const std::string& kind = head_toks[0];
    std::string dedup_key = section.header;
    if (!seen_headers.insert(dedup_key).second) {
      throw LoadError(detail::at_line(
          section.line_no, "duplicate section [" + section.header + "]"));
    }

    if (kind == "scenario") {
      for (const auto& line : section.lines) {
        auto toks = detail::split_ws(detail::strip_comment(line.text));
        if (toks.size() != 2) {
          throw LoadError(detail::at_line(line.no, "expected '<key> <value>'"));
        }
        if (toks[0] == "name") {
          sc.name = toks[1];
        } else if (toks[0] == "seed") {
          sc.seed = static_cast<std::uint64_t>(
              detail::parse_int(toks[1], line.no, "seed"));
        } else if (toks[0] == "horizon") {
          sc.horizon = detail::parse_int(toks[1], line.no, "horizon");
          if (sc.horizon < 0) {
            throw LoadError(detail::at_line(line.no, "horizon must be >= 0"));
          }
        } else {
          throw LoadError(
              detail::at_line(line.no, "unknown scenario key '" + toks[0] + "'"));
        }
      }
    } else if (kind == "world") {
      sc.region_records = parse_region_records(section.lines);
      have_world = true;
    } else if (kind == "topology") {
      sc.topology_lines = section.lines;
      have_topology = true;
    } else if (kind == "profiles") {
      profile_lines = section.lines;
    } else if (kind == "cache_policy") {
      std::map<int, Tick> table;
      for (const auto& line : section.lines) {
        auto toks = detail::split_ws(detail::strip_comment(line.text));
        if (toks.size() != 2) {
          throw LoadError(
              detail::at_line(line.no, "expected '<depth> <ticks>'"));
        }
        int depth =
            static_cast<int>(detail::parse_int(toks[0], line.no, "depth"));
        Tick ttl = detail::parse_int(toks[1], line.no, "ttl");
        table[depth] = ttl;
      }
      try {
        sc.policy = CachePolicy(table);
      } catch (const LoadError& e) {
        throw LoadError(detail::at_line(section.line_no, e.what()));
      }
    } else if (kind == "conduit") {
      if (head_toks.size() != 2) {
        throw LoadError(detail::at_line(section.line_no,
                                        "expected [conduit <user>]"));
      }
      ConduitSpec spec;
      spec.user = head_toks[1];
      std::vector<detail::Line> assembly_lines;
      for (const auto& line : section.lines) {
        auto toks = detail::split_ws(detail::strip_comment(line.text));
        if (!toks.empty() && toks[0] == "gateway") {
          if (toks.size() != 2) {
            throw LoadError(
                detail::at_line(line.no, "expected 'gateway <node>'"));
          }
          spec.gateway = toks[1];
          continue;
        }
        assembly_lines.push_back(line);
      }
      if (spec.gateway.empty()) {
        throw LoadError(detail::at_line(
            section.line_no,
            "conduit '" + spec.user + "' is missing a gateway line"));
      }
      spec.assembly = parse_assembly_spec(assembly_lines);
      sc.conduits.push_back(std::move(spec));
    } else if (kind == "server") {
      if (head_toks.size() != 2) {
        throw LoadError(
            detail::at_line(section.line_no, "expected [server <node>]"));
      }
      ServerSpec spec;
      spec.node = head_toks[1];
      spec.assembly = parse_assembly_spec(section.lines);
      sc.servers.push_back(std::move(spec));
    } else if (kind == "schedule") {
      schedule_lines = section.lines;
    } else {
      throw LoadError(detail::at_line(
          section.line_no, "unknown section [" + section.header + "]"));
    }
  }

  if (!have_world) throw LoadError("scenario is missing a [world] section");
  if (!have_topology) {
    throw LoadError("scenario is missing a [topology] section");
  }

  // Cross-validation: build everything once so every reference resolves.
  Network net = load_topology(sc.topology_lines, sc.build_world());

  for (const auto& line : sc.topology_lines) {
    auto toks = detail::split_ws(detail::strip_comment(line.text));
    if (toks.empty() || toks[0] == "hop_limit") continue;
    sc.first_node = toks[0];
    break;
  }

  for (const auto& line : profile_lines) {
    auto toks = detail::split_ws(detail::strip_comment(line.text));
    if (toks.size() != 4) {
      throw LoadError(detail::at_line(
          line.no, "expected '<user> <tags|-> <contacts> <home-node>'"));
    }
    Profile p;
    p.user = toks[0];
    p.tags = detail::parse_tags(toks[1]);
    for (const auto& c : detail::split_csv(toks[2])) p.contacts.push_back(c);
    p.home = toks[3];
    try {
      net.register_profile(p);
    } catch (const LoadError& e) {
      throw LoadError(detail::at_line(line.no, e.what()));
    }
    sc.profiles.push_back(std::move(p));
  }

  for (auto& conduit : sc.conduits) {
    bool has_profile = false;
    for (const auto& p : sc.profiles) {
      if (p.user == conduit.user) has_profile = true;
    }
    if (!has_profile) {
      throw LoadError("conduit user '" + conduit.user + "' has no profile");
    }
    if (!net.has_node(conduit.gateway)) {
      throw LoadError("conduit '" + conduit.user +
                      "' names unknown gateway node '" + conduit.gateway + "'");
    }
    Assembly assembly = assemble(conduit.assembly);
    for (const auto& s : assembly.sources()) {
      const std::string& type = assembly.component_type(s);
      if (type == "gps_source") {
        if (!conduit.gps_source.empty()) {
          throw LoadError("conduit '" + conduit.user +
                          "' declares more than one gps_source source");
        }
        conduit.gps_source = s;
      } else if (type == "sms_device" || type == "gprs_device") {
        conduit.device_sources.insert(s);
      }
    }
    if (conduit.gps_source.empty()) {
      throw LoadError("conduit '" + conduit.user +
                      "' needs a gps_source declared as a source");
    }
    for (const auto& s : assembly.sinks()) {
      const std::string& type = assembly.component_type(s);
      if ((type == "sms_device" || type == "gprs_device") &&
          conduit.uplink_sink.empty()) {
        conduit.uplink_sink = s;  // first device sink transmits upstream
      }
    }
    if (conduit.uplink_sink.empty()) {
      throw LoadError("conduit '" + conduit.user +
                      "' needs a device component declared as a sink");
    }
  }

  for (auto& server : sc.servers) {
    if (!net.has_node(server.node)) {
      throw LoadError("server assembly names unknown node '" + server.node +
                      "'");
    }
    Assembly assembly = assemble(server.assembly);
    for (const auto& s : assembly.sources()) {
      Component* c = assembly.component(s);
      if (c != nullptr && c->output_kinds().contains(EventKind::EnterWhere)) {
        server.inlet = s;
        break;
      }
    }
    if (server.inlet.empty()) {
      throw LoadError("server assembly for '" + server.node +
                      "' needs a p2p_inlet declared as a source");
    }
  }

  Tick prev_tick = 0;
  bool first_entry = true;
  for (const auto& line : schedule_lines) {
    std::string body = detail::strip_comment(line.text);
    auto toks = detail::split_ws(body);
    if (toks.empty()) continue;
    if (toks.size() < 2) {
      throw LoadError(detail::at_line(line.no, "expected '<tick> <kind> ...'"));
    }
    ScheduleEntry entry;
    entry.line_no = line.no;
    entry.tick = detail::parse_int(toks[0], line.no, "tick");
    if (entry.tick < 0) {
      throw LoadError(detail::at_line(line.no, "tick must be >= 0"));
    }
    if (entry.tick > sc.horizon) {
      throw LoadError(detail::at_line(
          line.no, "schedule entry is beyond the horizon"));
    }
    if (!first_entry && entry.tick < prev_tick) {
      throw LoadError(
          detail::at_line(line.no, "schedule is not sorted by tick"));
    }
    prev_tick = entry.tick;
    first_entry = false;

    const std::string& op = toks[1];
    if (op == "nmea") {
      if (toks.size() < 4) {
        throw LoadError(detail::at_line(
            line.no, "expected '<tick> nmea <user> <sentence>'"));
      }
      entry.kind = ScheduleEntry::Kind::Nmea;
      entry.user = toks[2];
      entry.raw_line = detail::rest_after_tokens(body, 3);
      if (sc.conduit_for(entry.user) == nullptr) {
        throw LoadError(detail::at_line(
            line.no, "user '" + entry.user + "' has no conduit"));
      }
    } else if (op == "hearsay") {
      if (toks.size() < 6) {
        throw LoadError(detail::at_line(
            line.no,
            "expected '<tick> hearsay <depositor> <where> <tags|-> <info>'"));
      }
      entry.kind = ScheduleEntry::Kind::HearsayInsert;
      entry.depositor = toks[2];
      entry.where = toks[3];
      entry.required_tags = detail::parse_tags(toks[4]);
      entry.info = detail::rest_after_tokens(body, 5);
      if (net.world().find(entry.where) == nullptr) {
        throw LoadError(detail::at_line(
            line.no, "hearsay names unknown where '" + entry.where + "'"));
      }
    } else if (op == "channel") {
      if (toks.size() != 4 || (toks[3] != "up" && toks[3] != "down")) {
        throw LoadError(detail::at_line(
            line.no, "expected '<tick> channel <name> up|down'"));
      }
      entry.kind = ScheduleEntry::Kind::ChannelToggle;
      entry.channel = toks[2];
      entry.channel_up = toks[3] == "up";
    } else {
      throw LoadError(
          detail::at_line(line.no, "unknown schedule kind '" + op + "'"));
    }
    sc.schedule.push_back(std::move(entry));
  }

  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open scenario file '" + path + "'");
  }
  return load_scenario(in);
}

}  // namespace gloss
