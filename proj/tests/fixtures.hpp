#pragma once

// Shared test fixtures: the canonical six-region world and its node
// hierarchy, mirroring the bundled anna-bob scenario.

#include "gloss/gloss.hpp"

namespace fixtures {

inline gloss::WorldTree world1() {
  return gloss::WorldTree::build({
      {"world", std::nullopt, {0, 100, 0, 100}},
      {"france", "world", {0, 50, 0, 100}},
      {"belgium", "world", {50, 100, 0, 100}},
      {"paris", "france", {0, 25, 0, 50}},
      {"rue-x", "paris", {0, 5, 0, 5}},
      {"brussels", "belgium", {50, 75, 0, 50}},
  });
}

/// Full six-node hierarchy over world1.
inline gloss::Network network1(int hop_limit = 32) {
  gloss::Network net(world1(), hop_limit);
  net.add_node("world-node", "world");
  net.add_node("france-node", "france", "world-node");
  net.add_node("belgium-node", "belgium", "world-node");
  net.add_node("paris-node", "paris", "france-node");
  net.add_node("rue-x-node", "rue-x", "paris-node");
  net.add_node("brussels-node", "brussels", "belgium-node");
  net.finalize();
  return net;
}

/// Same hierarchy but without nodes for paris and rue-x, so those regions
/// resolve to france-node.
inline gloss::Network network1_sparse(int hop_limit = 32) {
  gloss::Network net(world1(), hop_limit);
  net.add_node("world-node", "world");
  net.add_node("france-node", "france", "world-node");
  net.add_node("belgium-node", "belgium", "world-node");
  net.add_node("brussels-node", "brussels", "belgium-node");
  net.finalize();
  return net;
}

inline gloss::Profile bob_profile() {
  gloss::Profile p;
  p.user = "bob";
  p.tags = {"cafe", "jazz"};
  p.contacts = {"sms"};
  p.home = "brussels-node";
  return p;
}

/// The conduit of Fig-style shape: gps -> adapter -> filter -> bus ->
/// {ui, sms}, with the sms device doubling as the inbound source.
inline gloss::AssemblySpec conduit_spec(const gloss::UserId& user,
                                        double threshold = 100) {
  std::string text =
      "component gps   type=gps_source\n"
      "component adapt type=nmea_adapter user=" + user + "\n"
      "component filt  type=threshold_filter threshold=" +
      std::to_string(threshold) + "\n"
      "component ui    type=ui_tool\n"
      "component sms   type=sms_device\n"
      "pipe gps adapt\n"
      "pipe adapt filt\n"
      "pipe sms events\n"
      "bus events kinds=location,hearsay-notice filt -> ui sms\n"
      "source gps\n"
      "source sms\n"
      "sink ui\n"
      "sink sms\n";
  std::vector<gloss::detail::Line> lines;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) lines.push_back({++no, raw});
  return gloss::parse_assembly_spec(lines);
}

inline std::vector<gloss::detail::Line> to_lines(const std::string& text) {
  std::vector<gloss::detail::Line> lines;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) lines.push_back({++no, raw});
  return lines;
}

}  // namespace fixtures
