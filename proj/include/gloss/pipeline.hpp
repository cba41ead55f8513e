#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gloss/error.hpp"
#include "gloss/events.hpp"
#include "gloss/geo.hpp"
#include "gloss/nmea.hpp"

namespace gloss {

using Counters = std::map<std::string, std::uint64_t>;

struct PipeContext {
  Tick now = 0;
  Counters& counters;
};

/// Minimum interface of a pipeline component: consume one event, produce
/// zero or more. Declared kind sets bound what the router may deliver to it
/// and what it may emit.
class Component {
public:
  virtual ~Component() = default;
  virtual KindSet input_kinds() const = 0;
  virtual KindSet output_kinds() const = 0;
  virtual std::vector<Event> accept(const Event& e, PipeContext& ctx) = 0;
};

using Params = std::map<std::string, std::string>;

namespace detail {

inline void reject_unknown_params(const Params& params,
                                  std::initializer_list<const char*> allowed,
                                  const std::string& type) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (const char* a : allowed) {
      if (k == a) ok = true;
    }
    if (!ok) {
      throw LoadError("component type '" + type + "' has no parameter '" + k +
                      "'");
    }
  }
}

}  // namespace detail

inline std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (int i = 0; i < kEventKindCount; ++i) {
    auto k = static_cast<EventKind>(i);
    if (name == event_kind_name(k)) return k;
  }
  return std::nullopt;
}

/// Trace-driven stand-in for a GPS receiver: raw device strings are fed to
/// it externally and flow to whatever it is piped into.
class GpsSource : public Component {
public:
  KindSet input_kinds() const override { return KindSet::none(); }
  KindSet output_kinds() const override {
    return KindSet::of(EventKind::RawDeviceString);
  }
  std::vector<Event> accept(const Event&, PipeContext&) override { return {}; }
};

/// Converts raw NMEA lines into location events. Non-GGA sentences are
/// skipped; parse failures are counted, never propagated.
class NmeaAdapter : public Component {
public:
  explicit NmeaAdapter(UserId user) : user_(std::move(user)) {}

  KindSet input_kinds() const override {
    return KindSet::of(EventKind::RawDeviceString);
  }
  KindSet output_kinds() const override {
    return KindSet::of(EventKind::Location);
  }

  std::vector<Event> accept(const Event& e, PipeContext& ctx) override {
    GgaFix fix;
    const NmeaStatus status = parse_gga(e.as<RawPayload>().line, fix);
    if (status != NmeaStatus::Ok) {
      ++ctx.counters[std::string("nmea.") + nmea_status_name(status)];
      return {};
    }
    return {make_event(LocationPayload{user_, {fix.lat, fix.lon}, ctx.now})};
  }

private:
  UserId user_;
};

/// Passes a location on only when it is more than the threshold distance
/// from the last location emitted for that user.
class ThresholdFilter : public Component {
public:
  explicit ThresholdFilter(double threshold_m) : threshold_m_(threshold_m) {
    if (!(threshold_m > 0.0)) {
      throw LoadError("threshold_filter requires threshold > 0");
    }
  }

  KindSet input_kinds() const override {
    return KindSet::of(EventKind::Location);
  }
  KindSet output_kinds() const override {
    return KindSet::of(EventKind::Location);
  }

  std::vector<Event> accept(const Event& e, PipeContext& ctx) override {
    const auto& loc = e.as<LocationPayload>();
    auto it = last_.find(loc.user);
    if (it != last_.end() &&
        haversine_m(it->second, loc.point) <= threshold_m_) {
      ++ctx.counters["filter.suppressed"];
      return {};
    }
    last_[loc.user] = loc.point;
    return {e};
  }

private:
  double threshold_m_;
  std::map<UserId, GeoPoint> last_;
};

/// Boundary device (SMS, GPRS, ...). Locations delivered to it are queued
/// for transmission off the assembly; inbound notices are injected at it
/// and flow onward.
class NetDevice : public Component {
public:
  KindSet input_kinds() const override {
    return KindSet::of(EventKind::Location);
  }
  KindSet output_kinds() const override {
    return KindSet::of(EventKind::HearsayNotice);
  }

  std::vector<Event> accept(const Event& e, PipeContext&) override {
    transmitted.push_back(e.as<LocationPayload>());
    return {};
  }

  std::vector<LocationPayload> transmitted;
};

/// Injection point for events arriving from the overlay into a node-local
/// assembly.
class P2pInlet : public Component {
public:
  KindSet input_kinds() const override { return KindSet::none(); }
  KindSet output_kinds() const override { return KindSet::all(); }
  std::vector<Event> accept(const Event&, PipeContext&) override { return {}; }
};

/// Presentation endpoint; keeps what it was shown.
class UiTool : public Component {
public:
  KindSet input_kinds() const override { return KindSet::all(); }
  KindSet output_kinds() const override { return KindSet::none(); }

  std::vector<Event> accept(const Event& e, PipeContext&) override {
    received.push_back(e);
    return {};
  }

  std::vector<Event> received;
};

/// Bounded FIFO. Events accumulate (oldest dropped past capacity) until a
/// generic "flush" event releases them in arrival order.
class BufferComponent : public Component {
public:
  explicit BufferComponent(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw LoadError("buffer requires capacity > 0");
  }

  KindSet input_kinds() const override { return KindSet::all(); }
  KindSet output_kinds() const override { return KindSet::all(); }

  std::vector<Event> accept(const Event& e, PipeContext& ctx) override {
    if (e.kind() == EventKind::Generic &&
        e.as<GenericPayload>().element == "flush") {
      std::vector<Event> out(buffered_.begin(), buffered_.end());
      buffered_.clear();
      return out;
    }
    buffered_.push_back(e);
    if (buffered_.size() > capacity_) {
      buffered_.pop_front();
      ++ctx.counters["buffer.dropped"];
    }
    return {};
  }

private:
  std::size_t capacity_;
  std::deque<Event> buffered_;
};

using ComponentFactory =
    std::function<std::unique_ptr<Component>(const Params&)>;

inline const std::map<std::string, ComponentFactory>& builtin_components() {
  static const std::map<std::string, ComponentFactory> registry = [] {
    std::map<std::string, ComponentFactory> r;
    r["gps_source"] = [](const Params& p) {
      detail::reject_unknown_params(p, {}, "gps_source");
      return std::make_unique<GpsSource>();
    };
    r["nmea_adapter"] = [](const Params& p) {
      detail::reject_unknown_params(p, {"user"}, "nmea_adapter");
      auto it = p.find("user");
      if (it == p.end()) {
        throw LoadError("nmea_adapter requires user=<id>");
      }
      return std::make_unique<NmeaAdapter>(it->second);
    };
    r["threshold_filter"] = [](const Params& p) {
      detail::reject_unknown_params(p, {"threshold"}, "threshold_filter");
      auto it = p.find("threshold");
      if (it == p.end()) {
        throw LoadError("threshold_filter requires threshold=<metres>");
      }
      return std::make_unique<ThresholdFilter>(
          detail::parse_double(it->second, 0, "threshold"));
    };
    auto device = [](const Params& p) -> std::unique_ptr<Component> {
      detail::reject_unknown_params(p, {}, "device");
      return std::make_unique<NetDevice>();
    };
    r["sms_device"] = device;
    r["gprs_device"] = device;
    r["p2p_inlet"] = [](const Params& p) {
      detail::reject_unknown_params(p, {}, "p2p_inlet");
      return std::make_unique<P2pInlet>();
    };
    r["ui_tool"] = [](const Params& p) {
      detail::reject_unknown_params(p, {}, "ui_tool");
      return std::make_unique<UiTool>();
    };
    r["buffer"] = [](const Params& p) {
      detail::reject_unknown_params(p, {"capacity"}, "buffer");
      auto it = p.find("capacity");
      std::size_t cap = 64;
      if (it != p.end()) {
        cap = static_cast<std::size_t>(
            detail::parse_int(it->second, 0, "capacity"));
      }
      return std::make_unique<BufferComponent>(cap);
    };
    return r;
  }();
  return registry;
}

struct ComponentDecl {
  std::string name;
  std::string type;
  Params params;
};

struct PipeDecl {
  std::string src;
  std::string dst;
};

struct BusDecl {
  std::string name;
  KindSet kinds = KindSet::all();
  std::vector<std::string> publishers;
  std::vector<std::string> subscribers;
};

struct AssemblySpec {
  std::vector<ComponentDecl> components;
  std::vector<PipeDecl> pipes;
  std::vector<BusDecl> buses;
  std::vector<std::string> sources;
  std::vector<std::string> sinks;
};

/// An event delivered to a sink component during one injection.
struct SinkHit {
  std::string sink;
  Event event;
};

/// Components and buses wired into a verified acyclic dataflow graph.
/// Confined to one logical execution context; never invoke concurrently.
class Assembly {
public:
  std::vector<SinkHit> inject(const std::string& source, Event e,
                              Tick now = 0) {
    auto it = index_.find(source);
    if (it == index_.end() || !nodes_[it->second].is_source) {
      throw LoadError("unknown source '" + source + "'");
    }
    GraphNode& src = nodes_[it->second];
    if (!out_kinds(src).contains(e.kind())) {
      throw LoadError("source '" + source + "' cannot emit kind '" +
                      event_kind_name(e.kind()) + "'");
    }
    e.seq = next_seq_++;
    std::deque<Delivery> queue;
    route_outputs(it->second, e, queue);
    return drain(queue, now);
  }

  /// Hands an event straight to a bus, as a publisher would.
  std::vector<SinkHit> publish(const std::string& bus, Event e, Tick now = 0) {
    auto it = index_.find(bus);
    if (it == index_.end() || nodes_[it->second].comp != nullptr) {
      throw LoadError("unknown bus '" + bus + "'");
    }
    if (!nodes_[it->second].bus_kinds.contains(e.kind())) {
      throw LoadError("bus '" + bus + "' does not carry kind '" +
                      event_kind_name(e.kind()) + "'");
    }
    e.seq = next_seq_++;
    std::deque<Delivery> queue;
    queue.push_back({it->second, std::move(e)});
    return drain(queue, now);
  }

  const Counters& counters() const { return counters_; }
  Counters& counters() { return counters_; }

  Component* component(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) return nullptr;
    return nodes_[it->second].comp.get();
  }

  template <typename T>
  T* component_as(const std::string& name) {
    return dynamic_cast<T*>(component(name));
  }

  const std::string& component_type(const std::string& name) const {
    static const std::string empty;
    auto it = index_.find(name);
    if (it == index_.end()) return empty;
    return nodes_[it->second].type_name;
  }

  std::size_t component_count() const { return component_count_; }
  std::size_t bus_count() const { return bus_count_; }
  const std::vector<std::string>& sources() const { return source_names_; }
  const std::vector<std::string>& sinks() const { return sink_names_; }

private:
  friend Assembly assemble(const AssemblySpec&,
                           const std::map<std::string, ComponentFactory>&);

  struct GraphNode {
    std::string name;
    std::string type_name;               // component type or "bus"
    std::unique_ptr<Component> comp;     // null for buses
    KindSet bus_kinds;
    std::vector<std::size_t> out;        // edge order is delivery order
    bool is_source = false;
    bool is_sink = false;
  };

  struct Delivery {
    std::size_t target;
    Event event;
  };

  KindSet in_kinds(const GraphNode& n) const {
    return n.comp != nullptr ? n.comp->input_kinds() : n.bus_kinds;
  }
  KindSet out_kinds(const GraphNode& n) const {
    return n.comp != nullptr ? n.comp->output_kinds() : n.bus_kinds;
  }

  void route_outputs(std::size_t from, const Event& e,
                     std::deque<Delivery>& queue) {
    for (std::size_t to : nodes_[from].out) {
      if (in_kinds(nodes_[to]).contains(e.kind())) {
        queue.push_back({to, e});
      } else {
        ++counters_["pipeline.kind_skipped"];
      }
    }
  }

  std::vector<SinkHit> drain(std::deque<Delivery>& queue, Tick now) {
    std::vector<SinkHit> hits;
    while (!queue.empty()) {
      Delivery d = std::move(queue.front());
      queue.pop_front();
      GraphNode& n = nodes_[d.target];
      if (n.comp == nullptr) {
        if (n.out.empty()) {
          ++counters_["bus.dropped"];
          continue;
        }
        route_outputs(d.target, d.event, queue);
        continue;
      }
      if (!n.comp->input_kinds().contains(d.event.kind())) {
        throw InternalError("router delivered undeclared kind to '" + n.name +
                            "'");
      }
      if (n.is_sink) {
        hits.push_back({n.name, d.event});
      }
      PipeContext ctx{now, counters_};
      std::vector<Event> outs = n.comp->accept(d.event, ctx);
      for (Event& o : outs) {
        if (!n.comp->output_kinds().contains(o.kind())) {
          throw InternalError("component '" + n.name +
                              "' emitted undeclared kind '" +
                              event_kind_name(o.kind()) + "'");
        }
        o.seq = next_seq_++;
        route_outputs(d.target, o, queue);
      }
    }
    return hits;
  }

  std::vector<GraphNode> nodes_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> source_names_;
  std::vector<std::string> sink_names_;
  Counters counters_;
  std::uint64_t next_seq_ = 1;
  std::size_t component_count_ = 0;
  std::size_t bus_count_ = 0;
};

namespace detail {

// An event can cycle only if some (node, kind) state repeats along a flow.
// Buses re-emit the same kind; a component may turn any accepted kind into
// any of its declared outputs.
inline void check_kind_flow_acyclic(
    const std::vector<std::pair<std::string, std::string>>& edges,
    const std::function<KindSet(const std::string&)>& in_of,
    const std::function<KindSet(const std::string&)>& out_of,
    const std::function<bool(const std::string&)>& is_bus) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [u, v] : edges) adj[u].push_back(v);

  // state := node + kind of the event leaving that node
  std::map<std::pair<std::string, int>, int> color;  // 0 new, 1 open, 2 done
  std::function<void(const std::string&, int)> dfs = [&](const std::string& u,
                                                         int kind) {
    auto key = std::make_pair(u, kind);
    color[key] = 1;
    auto it = adj.find(u);
    if (it != adj.end()) {
      for (const auto& v : it->second) {
        if (!in_of(v).contains(static_cast<EventKind>(kind))) continue;
        KindSet next_out = is_bus(v)
                               ? KindSet::of(static_cast<EventKind>(kind))
                               : out_of(v);
        for (int k2 = 0; k2 < kEventKindCount; ++k2) {
          if (!next_out.contains(static_cast<EventKind>(k2))) continue;
          auto nk = std::make_pair(v, k2);
          int c = color[nk];
          if (c == 1) {
            throw LoadError("cycle detected through link '" + u + "' -> '" +
                            v + "'");
          }
          if (c == 0) dfs(v, k2);
        }
      }
    }
    color[key] = 2;
  };

  std::set<std::string> nodes;
  for (const auto& [u, v] : edges) {
    nodes.insert(u);
    nodes.insert(v);
  }
  for (const auto& n : nodes) {
    for (int k = 0; k < kEventKindCount; ++k) {
      if (!out_of(n).contains(static_cast<EventKind>(k))) continue;
      if (color[{n, k}] == 0) dfs(n, k);
    }
  }
}

}  // namespace detail

inline Assembly assemble(
    const AssemblySpec& spec,
    const std::map<std::string, ComponentFactory>& registry =
        builtin_components()) {
  Assembly a;
  auto add_node = [&a](Assembly::GraphNode node) {
    if (a.index_.count(node.name) != 0) {
      throw LoadError("duplicate assembly element '" + node.name + "'");
    }
    a.index_[node.name] = a.nodes_.size();
    a.nodes_.push_back(std::move(node));
  };

  for (const auto& decl : spec.components) {
    auto fit = registry.find(decl.type);
    if (fit == registry.end()) {
      throw LoadError("unknown component type '" + decl.type + "' for '" +
                      decl.name + "'");
    }
    Assembly::GraphNode n;
    n.name = decl.name;
    n.type_name = decl.type;
    n.comp = fit->second(decl.params);
    add_node(std::move(n));
    ++a.component_count_;
  }
  for (const auto& bus : spec.buses) {
    Assembly::GraphNode n;
    n.name = bus.name;
    n.type_name = "bus";
    n.bus_kinds = bus.kinds;
    add_node(std::move(n));
    ++a.bus_count_;
  }

  auto node_of = [&a](const std::string& name,
                      const char* role) -> std::size_t {
    auto it = a.index_.find(name);
    if (it == a.index_.end()) {
      throw LoadError(std::string("link names unknown ") + role + " '" + name +
                      "'");
    }
    return it->second;
  };

  std::vector<std::pair<std::string, std::string>> edges;
  auto add_edge = [&](const std::string& src, const std::string& dst) {
    std::size_t u = node_of(src, "producer");
    std::size_t v = node_of(dst, "consumer");
    const KindSet live =
        a.out_kinds(a.nodes_[u]).intersect(a.in_kinds(a.nodes_[v]));
    if (live.empty()) {
      throw LoadError("kind-incompatible link '" + src + "' -> '" + dst + "'");
    }
    a.nodes_[u].out.push_back(v);
    edges.emplace_back(src, dst);
  };

  for (const auto& pipe : spec.pipes) add_edge(pipe.src, pipe.dst);
  for (const auto& bus : spec.buses) {
    for (const auto& pub : bus.publishers) add_edge(pub, bus.name);
    for (const auto& sub : bus.subscribers) add_edge(bus.name, sub);
  }

  detail::check_kind_flow_acyclic(
      edges,
      [&a](const std::string& n) { return a.in_kinds(a.nodes_[a.index_.at(n)]); },
      [&a](const std::string& n) {
        return a.out_kinds(a.nodes_[a.index_.at(n)]);
      },
      [&a](const std::string& n) {
        return a.nodes_[a.index_.at(n)].comp == nullptr;
      });

  for (const auto& s : spec.sources) {
    std::size_t i = node_of(s, "source");
    if (a.nodes_[i].comp == nullptr) {
      throw LoadError("source '" + s + "' is a bus, not a component");
    }
    a.nodes_[i].is_source = true;
    a.source_names_.push_back(s);
  }
  for (const auto& s : spec.sinks) {
    std::size_t i = node_of(s, "sink");
    if (a.nodes_[i].comp == nullptr) {
      throw LoadError("sink '" + s + "' is a bus, not a component");
    }
    a.nodes_[i].is_sink = true;
    a.sink_names_.push_back(s);
  }
  return a;
}

/// Parses assembly description lines:
///   component <name> type=<type> [key=value ...]
///   pipe <src> <dst>
///   bus <name> [kinds=k1,k2] [pub ...] -> [sub ...]
///   source <name>
///   sink <name>
inline AssemblySpec parse_assembly_spec(const std::vector<detail::Line>& lines) {
  AssemblySpec spec;
  for (const auto& line : lines) {
    std::string body = detail::strip_comment(line.text);
    if (body.empty()) continue;
    auto toks = detail::split_ws(body);
    const std::string& head = toks[0];
    if (head == "component") {
      if (toks.size() < 3) {
        throw LoadError(detail::at_line(
            line.no, "expected 'component <name> type=<type> ...'"));
      }
      ComponentDecl decl;
      decl.name = toks[1];
      for (std::size_t i = 2; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos) {
          throw LoadError(
              detail::at_line(line.no, "expected key=value, got '" + toks[i] +
                                           "'"));
        }
        std::string key = toks[i].substr(0, eq);
        std::string value = toks[i].substr(eq + 1);
        if (key == "type") {
          decl.type = value;
        } else {
          decl.params[key] = value;
        }
      }
      if (decl.type.empty()) {
        throw LoadError(
            detail::at_line(line.no, "component '" + decl.name +
                                         "' is missing type=<type>"));
      }
      spec.components.push_back(std::move(decl));
    } else if (head == "pipe") {
      if (toks.size() != 3) {
        throw LoadError(detail::at_line(line.no, "expected 'pipe <src> <dst>'"));
      }
      spec.pipes.push_back({toks[1], toks[2]});
    } else if (head == "bus") {
      if (toks.size() < 2) {
        throw LoadError(detail::at_line(line.no, "expected 'bus <name> ...'"));
      }
      BusDecl bus;
      bus.name = toks[1];
      std::size_t i = 2;
      if (i < toks.size() && toks[i].rfind("kinds=", 0) == 0) {
        KindSet ks;
        for (const auto& kname : detail::split_csv(toks[i].substr(6))) {
          auto k = parse_event_kind(kname);
          if (!k.has_value()) {
            throw LoadError(
                detail::at_line(line.no, "unknown event kind '" + kname + "'"));
          }
          ks.add(*k);
        }
        bus.kinds = ks;
        ++i;
      }
      bool seen_arrow = false;
      for (; i < toks.size(); ++i) {
        if (toks[i] == "->") {
          seen_arrow = true;
          continue;
        }
        (seen_arrow ? bus.subscribers : bus.publishers).push_back(toks[i]);
      }
      if (!seen_arrow) {
        throw LoadError(detail::at_line(
            line.no, "bus '" + bus.name + "' is missing '->' separator"));
      }
      spec.buses.push_back(std::move(bus));
    } else if (head == "source" || head == "sink") {
      if (toks.size() != 2) {
        throw LoadError(
            detail::at_line(line.no, "expected '" + head + " <name>'"));
      }
      (head == "source" ? spec.sources : spec.sinks).push_back(toks[1]);
    } else {
      throw LoadError(
          detail::at_line(line.no, "unknown assembly directive '" + head + "'"));
    }
  }
  return spec;
}

}  // namespace gloss
