#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "gloss/geo.hpp"

namespace gloss {

enum class NmeaStatus {
  Ok,
  Skipped,           // valid sentence of a type other than GGA
  ChecksumMismatch,  // "*hh" does not match the XOR of the body
  Malformed,
  NoFix,  // GGA fix-quality field is 0
};

inline const char* nmea_status_name(NmeaStatus s) {
  switch (s) {
    case NmeaStatus::Ok: return "ok";
    case NmeaStatus::Skipped: return "skipped";
    case NmeaStatus::ChecksumMismatch: return "checksum_mismatch";
    case NmeaStatus::Malformed: return "malformed";
    case NmeaStatus::NoFix: return "no_fix";
  }
  return "?";
}

struct GgaFix {
  double lat = 0.0;
  double lon = 0.0;
};

/// XOR of all characters between '$' and '*'.
inline std::uint8_t nmea_checksum(std::string_view body) {
  std::uint8_t sum = 0;
  for (char c : body) sum ^= static_cast<std::uint8_t>(c);
  return sum;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view body) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || body[i] == ',') {
      fields.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline bool parse_hex_byte(std::string_view s, std::uint8_t& out) {
  if (s.size() != 2) return false;
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + 2, v, 16);
  if (ec != std::errc() || ptr != s.data() + 2) return false;
  out = static_cast<std::uint8_t>(v);
  return true;
}

// ddmm.mmmm (or dddmm.mmmm) with hemisphere letter to signed degrees.
inline bool parse_angle(std::string_view value, std::string_view hemi,
                        char pos, char neg, double limit, double& out) {
  if (value.empty() || hemi.size() != 1) return false;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || v < 0.0) {
    return false;
  }
  const double dd = std::floor(v / 100.0);
  const double minutes = v - dd * 100.0;
  if (minutes >= 60.0) return false;
  double deg = dd + minutes / 60.0;
  if (hemi[0] == neg) {
    deg = -deg;
  } else if (hemi[0] != pos) {
    return false;
  }
  if (std::abs(deg) > limit) return false;
  out = deg;
  return true;
}

}  // namespace detail

/// Parses one NMEA 0183 GGA sentence into a position fix. Checksum is
/// verified first, so a corrupted sentence reports ChecksumMismatch even
/// when its fields are unreadable.
inline NmeaStatus parse_gga(std::string_view line, GgaFix& out) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r' ||
                           line.back() == ' ')) {
    line.remove_suffix(1);
  }
  if (line.size() < 4 || line.front() != '$') return NmeaStatus::Malformed;
  const std::size_t star = line.rfind('*');
  if (star == std::string_view::npos || star + 3 != line.size()) {
    return NmeaStatus::Malformed;
  }
  std::uint8_t declared = 0;
  if (!detail::parse_hex_byte(line.substr(star + 1, 2), declared)) {
    return NmeaStatus::Malformed;
  }
  const std::string_view body = line.substr(1, star - 1);
  if (nmea_checksum(body) != declared) return NmeaStatus::ChecksumMismatch;

  auto fields = detail::split_fields(body);
  const std::string_view type = fields[0];
  if (type.size() != 5 || type.substr(2) != "GGA") return NmeaStatus::Skipped;
  // 0:type 1:utc 2:lat 3:N/S 4:lon 5:E/W 6:fix-quality
  if (fields.size() < 7) return NmeaStatus::Malformed;
  if (fields[6] == "0") return NmeaStatus::NoFix;

  GgaFix fix;
  if (!detail::parse_angle(fields[2], fields[3], 'N', 'S', 90.0, fix.lat)) {
    return NmeaStatus::Malformed;
  }
  if (!detail::parse_angle(fields[4], fields[5], 'E', 'W', 180.0, fix.lon)) {
    return NmeaStatus::Malformed;
  }
  out = fix;
  return NmeaStatus::Ok;
}

namespace detail {

// degrees to "ddmm.mmmm"/"dddmm.mmmm" plus hemisphere, carrying rounded
// minutes that land on 60.
inline std::string fmt_angle(double deg, int dd_digits, char pos, char neg,
                             char& hemi) {
  hemi = deg < 0.0 ? neg : pos;
  const double mag = std::abs(deg);
  int dd = static_cast<int>(mag);
  int m4 = static_cast<int>(
      std::llround((mag - static_cast<double>(dd)) * 60.0 * 10000.0));
  if (m4 >= 600000) {
    m4 -= 600000;
    ++dd;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%0*d%02d.%04d", dd_digits, dd, m4 / 10000,
                m4 % 10000);
  return buf;
}

}  // namespace detail

/// Formats a GGA sentence for the given position, with a valid checksum.
/// Minutes carry four decimals, so a parse round-trip stays within
/// 1e-4 degrees.
inline std::string format_gga(double lat, double lon,
                              std::string_view utc = "000000",
                              int fix_quality = 1) {
  char lat_h = 'N';
  char lon_h = 'E';
  const std::string lat_s = detail::fmt_angle(lat, 2, 'N', 'S', lat_h);
  const std::string lon_s = detail::fmt_angle(lon, 3, 'E', 'W', lon_h);
  std::string body = "GPGGA,";
  body += utc;
  body += ',';
  body += lat_s;
  body += ',';
  body += lat_h;
  body += ',';
  body += lon_s;
  body += ',';
  body += lon_h;
  body += ',';
  body += std::to_string(fix_quality);
  body += ",08,0.9,0.0,M,0.0,M,,";
  char buf[8];
  std::snprintf(buf, sizeof(buf), "*%02X", nmea_checksum(body));
  return "$" + body + buf;
}

}  // namespace gloss
