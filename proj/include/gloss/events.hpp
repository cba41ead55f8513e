#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <variant>

#include "gloss/geo.hpp"
#include "gloss/types.hpp"

namespace gloss {

enum class EventKind : std::uint8_t {
  RawDeviceString = 0,
  Location,
  EnterWhere,
  HearsayNotice,
  ProfileRequest,
  ProfileReply,
  Generic,
};

constexpr int kEventKindCount = 7;

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::RawDeviceString: return "raw";
    case EventKind::Location: return "location";
    case EventKind::EnterWhere: return "enter-where";
    case EventKind::HearsayNotice: return "hearsay-notice";
    case EventKind::ProfileRequest: return "profile-request";
    case EventKind::ProfileReply: return "profile-reply";
    case EventKind::Generic: return "generic";
  }
  return "?";
}

struct RawPayload {
  std::string line;
};

struct LocationPayload {
  UserId user;
  GeoPoint point;
  Tick t = 0;
};

struct EnterWherePayload {
  UserId user;
  RegionId region;
  Tick t = 0;
};

struct HearsayNoticePayload {
  std::string hearsay_id;
  std::string info;
  UserId recipient;
};

struct ProfileRequestPayload {
  UserId user;
};

struct ProfileReplyPayload {
  UserId user;
  Profile profile;
};

struct GenericPayload {
  std::string element;
  std::map<std::string, std::string> attrs;
};

/// A typed value flowing through pipelines and, wrapped in an envelope,
/// between overlay nodes. The sequence number is assigned by the owning
/// assembly and is strictly increasing within it.
struct Event {
  std::uint64_t seq = 0;
  std::variant<RawPayload, LocationPayload, EnterWherePayload,
               HearsayNoticePayload, ProfileRequestPayload, ProfileReplyPayload,
               GenericPayload>
      payload;

  EventKind kind() const { return static_cast<EventKind>(payload.index()); }

  template <typename T>
  const T& as() const {
    return std::get<T>(payload);
  }
};

inline Event make_event(RawPayload p) { return Event{0, std::move(p)}; }
inline Event make_event(LocationPayload p) { return Event{0, std::move(p)}; }
inline Event make_event(EnterWherePayload p) { return Event{0, std::move(p)}; }
inline Event make_event(HearsayNoticePayload p) {
  return Event{0, std::move(p)};
}
inline Event make_event(ProfileRequestPayload p) {
  return Event{0, std::move(p)};
}
inline Event make_event(ProfileReplyPayload p) { return Event{0, std::move(p)}; }
inline Event make_event(GenericPayload p) { return Event{0, std::move(p)}; }

/// Fixed-size set of event kinds, used for component interface declarations.
class KindSet {
public:
  constexpr KindSet() = default;

  static constexpr KindSet all() {
    KindSet s;
    s.bits_ = (1u << kEventKindCount) - 1u;
    return s;
  }

  static constexpr KindSet none() { return KindSet(); }

  template <typename... Ks>
  static constexpr KindSet of(Ks... ks) {
    KindSet s;
    (s.add(ks), ...);
    return s;
  }

  constexpr void add(EventKind k) {
    bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }

  constexpr bool contains(EventKind k) const {
    return (bits_ & (1u << static_cast<unsigned>(k))) != 0;
  }

  constexpr KindSet intersect(KindSet other) const {
    KindSet s;
    s.bits_ = bits_ & other.bits_;
    return s;
  }

  constexpr bool empty() const { return bits_ == 0; }

  friend constexpr bool operator==(KindSet, KindSet) = default;

private:
  std::uint8_t bits_ = 0;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Coordinates are printed with exactly six decimal places so serialized
// events are byte-stable.
inline std::string fmt_coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string join(const std::set<std::string>& parts, char sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out += sep;
    out += p;
    first = false;
  }
  return out;
}

}  // namespace detail

/// Canonical one-line XML form of an event. Attribute order is fixed per
/// kind; this is the wire format for trace logs and inter-node payloads.
inline std::string to_xml(const Event& e) {
  using detail::xml_escape;
  std::string out = "<";
  out += event_kind_name(e.kind());
  auto attr = [&out](std::string_view name, std::string_view value) {
    out += ' ';
    out += name;
    out += "=\"";
    out += xml_escape(value);
    out += '"';
  };
  switch (e.kind()) {
    case EventKind::RawDeviceString:
      attr("line", e.as<RawPayload>().line);
      break;
    case EventKind::Location: {
      const auto& p = e.as<LocationPayload>();
      attr("user", p.user);
      attr("lat", detail::fmt_coord(p.point.lat));
      attr("lon", detail::fmt_coord(p.point.lon));
      attr("t", std::to_string(p.t));
      break;
    }
    case EventKind::EnterWhere: {
      const auto& p = e.as<EnterWherePayload>();
      attr("user", p.user);
      attr("region", p.region);
      attr("t", std::to_string(p.t));
      break;
    }
    case EventKind::HearsayNotice: {
      const auto& p = e.as<HearsayNoticePayload>();
      attr("id", p.hearsay_id);
      attr("recipient", p.recipient);
      attr("info", p.info);
      break;
    }
    case EventKind::ProfileRequest:
      attr("user", e.as<ProfileRequestPayload>().user);
      break;
    case EventKind::ProfileReply: {
      const auto& p = e.as<ProfileReplyPayload>();
      attr("user", p.user);
      attr("tags", detail::join(p.profile.tags, ','));
      attr("contacts", detail::join(p.profile.contacts, ','));
      attr("home", p.profile.home);
      break;
    }
    case EventKind::Generic: {
      const auto& p = e.as<GenericPayload>();
      out = "<" + xml_escape(p.element);
      for (const auto& [k, v] : p.attrs) attr(k, v);
      break;
    }
  }
  out += "/>";
  return out;
}

}  // namespace gloss
