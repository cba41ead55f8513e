// Command-line front end: scenario replay, validation, and the brute-force
// oracles used to cross-check the library.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gloss/gloss.hpp"
#include "gloss/oracles.hpp"

namespace {

int cmd_run(const std::string& path, std::uint64_t seed, bool seed_set,
            bool no_cache, const std::string& format, bool trace) {
  gloss::Scenario scenario = gloss::load_scenario_file(path);
  gloss::Simulator sim(std::move(scenario));
  gloss::RunOptions options;
  if (seed_set) options.seed = seed;
  options.use_cache = !no_cache;
  if (trace) options.trace = &std::cout;
  gloss::Report report = sim.run(options);
  std::cout << gloss::report_emit(report, format == "machine"
                                              ? gloss::ReportFormat::Machine
                                              : gloss::ReportFormat::Human);
  return 0;
}

int cmd_validate(const std::string& path) {
  gloss::Scenario scenario = gloss::load_scenario_file(path);
  gloss::Network net = scenario.build_network();
  std::cout << "ok: " << scenario.name << " (" << net.nodes().size()
            << " nodes, " << scenario.profiles.size() << " profiles, "
            << scenario.conduits.size() << " conduits, "
            << scenario.schedule.size() << " schedule entries)\n";
  return 0;
}

gloss::WorldTree load_world_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gloss::LoadError("cannot open world file '" + path + "'");
  return gloss::load_world(in);
}

int cmd_oracle_containment(const std::string& world_path, double lat,
                           double lon) {
  gloss::WorldTree world = load_world_file(world_path);
  gloss::GeoPoint p{lat, lon};
  auto deepest = gloss::oracle::scan_deepest(world, p);
  if (!deepest.has_value()) {
    std::cout << "outside-world\n";
    return 0;
  }
  std::cout << "deepest " << *deepest << "\npath";
  for (const auto& r : gloss::oracle::scan_path(world, p)) {
    std::cout << " " << r;
  }
  std::cout << "\n";
  return 0;
}

int cmd_oracle_route(const std::string& world_path,
                     const std::string& topology_path,
                     const std::string& start, const std::string& target) {
  std::ifstream topo(topology_path);
  if (!topo) {
    throw gloss::LoadError("cannot open topology file '" + topology_path +
                           "'");
  }
  gloss::Network net =
      gloss::load_topology(topo, load_world_file(world_path));
  auto terminal = gloss::oracle::scan_owning_node(net, target);
  if (!terminal.has_value()) {
    std::cout << "no-owning-node\n";
    return 0;
  }
  std::cout << "terminal " << *terminal << "\npath";
  for (const auto& n : gloss::oracle::bfs_path(net, start, *terminal)) {
    std::cout << " " << n;
  }
  std::cout << "\n";
  return 0;
}

int cmd_oracle_haversine(double lat1, double lon1, double lat2, double lon2) {
  std::printf("%.3f\n", gloss::oracle::haversine_reference_m({lat1, lon1},
                                                             {lat2, lon2}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gloss: geo-spatial overlay and hearsay simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::uint64_t seed = 0;
  bool no_cache = false;
  std::string format = "human";
  bool trace = false;

  CLI::App* run = app.add_subcommand("run", "replay a scenario");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the scenario seed");
  run->add_flag("--no-cache", no_cache, "disable profile caching");
  run->add_option("--report", format, "report format")
      ->check(CLI::IsMember({"human", "machine"}));
  run->add_flag("--trace", trace, "log events and routes to stdout");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", validate_path, "scenario file")->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "brute-force reference answers");
  oracle->require_subcommand(1);

  std::string world_path;
  std::string topology_path;
  std::string start_node;
  std::string target_region;
  double lat = 0.0, lon = 0.0, lat2 = 0.0, lon2 = 0.0;

  CLI::App* containment =
      oracle->add_subcommand("containment", "deepest region by full scan");
  containment->add_option("world", world_path)->required();
  containment->add_option("lat", lat)->required();
  containment->add_option("lon", lon)->required();

  CLI::App* route =
      oracle->add_subcommand("route", "expected terminal and tree path");
  route->add_option("world", world_path)->required();
  route->add_option("topology", topology_path)->required();
  route->add_option("start", start_node)->required();
  route->add_option("target", target_region)->required();

  CLI::App* haversine =
      oracle->add_subcommand("haversine", "great-circle distance in metres");
  haversine->add_option("lat1", lat)->required();
  haversine->add_option("lon1", lon)->required();
  haversine->add_option("lat2", lat2)->required();
  haversine->add_option("lon2", lon2)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario_path, seed, seed_opt->count() > 0, no_cache,
                     format, trace);
    }
    if (validate->parsed()) {
      return cmd_validate(validate_path);
    }
    if (oracle->parsed()) {
      if (containment->parsed()) {
        return cmd_oracle_containment(world_path, lat, lon);
      }
      if (route->parsed()) {
        return cmd_oracle_route(world_path, topology_path, start_node,
                                target_region);
      }
      if (haversine->parsed()) {
        return cmd_oracle_haversine(lat, lon, lat2, lon2);
      }
    }
  } catch (const gloss::LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const gloss::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
