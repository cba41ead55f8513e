#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gloss/nmea.hpp"

#include "generators.hpp"

using namespace gloss;

namespace {
constexpr const char* kReference =
    "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47";
}

TEST_CASE("checksum is the XOR of the sentence body") {
  CHECK(nmea_checksum("GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,"
                      "46.9,M,,") == 0x47);
}

TEST_CASE("a valid GGA sentence parses to decimal degrees") {
  GgaFix fix;
  REQUIRE(parse_gga(kReference, fix) == NmeaStatus::Ok);
  CHECK_THAT(fix.lat, Catch::Matchers::WithinAbs(48.1173, 1e-9));
  CHECK_THAT(fix.lon, Catch::Matchers::WithinAbs(11.0 + 31.0 / 60.0, 1e-9));

  // trailing CR/LF is tolerated
  GgaFix fix2;
  std::string crlf = std::string(kReference) + "\r\n";
  CHECK(parse_gga(crlf, fix2) == NmeaStatus::Ok);
}

TEST_CASE("a corrupted checksum is rejected as such") {
  std::string bad(kReference);
  bad[bad.size() - 2] = '0';
  bad[bad.size() - 1] = '0';
  GgaFix fix;
  CHECK(parse_gga(bad, fix) == NmeaStatus::ChecksumMismatch);
}

TEST_CASE("fix quality zero yields no event") {
  std::string body = "GPGGA,000000,,,,,0,00,,,M,,M,,";
  char buf[8];
  std::snprintf(buf, sizeof(buf), "*%02X", nmea_checksum(body));
  GgaFix fix;
  CHECK(parse_gga("$" + body + buf, fix) == NmeaStatus::NoFix);
}

TEST_CASE("non-GGA sentences are skipped") {
  std::string body =
      "GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W";
  char buf[8];
  std::snprintf(buf, sizeof(buf), "*%02X", nmea_checksum(body));
  GgaFix fix;
  CHECK(parse_gga("$" + body + buf, fix) == NmeaStatus::Skipped);
}

TEST_CASE("malformed sentences are reported distinctly") {
  GgaFix fix;
  CHECK(parse_gga("", fix) == NmeaStatus::Malformed);
  CHECK(parse_gga("GPGGA,123519*00", fix) == NmeaStatus::Malformed);  // no $
  CHECK(parse_gga("$GPGGA,123519,4807.038,N", fix) ==
        NmeaStatus::Malformed);  // no checksum
  CHECK(parse_gga("$GPGGA,1*zz", fix) == NmeaStatus::Malformed);

  auto with_checksum = [](const std::string& body) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "*%02X", nmea_checksum(body));
    return "$" + body + buf;
  };
  // too few fields
  CHECK(parse_gga(with_checksum("GPGGA,123519,4807.038,N"), fix) ==
        NmeaStatus::Malformed);
  // minutes out of range
  CHECK(parse_gga(with_checksum(
                      "GPGGA,123519,4861.000,N,01131.000,E,1,08,0.9,5,M,4,M,,"),
                  fix) == NmeaStatus::Malformed);
  // bad hemisphere letter
  CHECK(parse_gga(with_checksum(
                      "GPGGA,123519,4807.038,X,01131.000,E,1,08,0.9,5,M,4,M,,"),
                  fix) == NmeaStatus::Malformed);
  // longitude beyond 180
  CHECK(parse_gga(with_checksum(
                      "GPGGA,123519,4807.038,N,18131.000,E,1,08,0.9,5,M,4,M,,"),
                  fix) == NmeaStatus::Malformed);
}

TEST_CASE("format then parse recovers coordinates to NMEA precision") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const double lat = gen::uniform(rng, -89.9, 89.9);
    const double lon = gen::uniform(rng, -179.9, 179.9);
    GgaFix fix;
    REQUIRE(parse_gga(format_gga(lat, lon), fix) == NmeaStatus::Ok);
    CHECK_THAT(fix.lat, Catch::Matchers::WithinAbs(lat, 1e-4));
    CHECK_THAT(fix.lon, Catch::Matchers::WithinAbs(lon, 1e-4));
  }
}

TEST_CASE("every checksum corruption is caught") {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    std::string line = format_gga(gen::uniform(rng, -89, 89),
                                  gen::uniform(rng, -179, 179));
    const std::size_t star = line.rfind('*');
    unsigned declared = std::stoul(line.substr(star + 1), nullptr, 16);
    unsigned wrong = (declared + 1 + static_cast<unsigned>(i) % 254) & 0xFF;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02X", wrong);
    line.replace(star + 1, 2, buf);
    GgaFix fix;
    CHECK(parse_gga(line, fix) == NmeaStatus::ChecksumMismatch);
  }
}
