#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gloss/geo.hpp"
#include "gloss/oracles.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

using namespace gloss;

TEST_CASE("rectangle containment is half-open") {
  WorldTree world = fixtures::world1();
  const Region& france = world.at("france");
  const Region& belgium = world.at("belgium");
  const Region& ruex = world.at("rue-x");

  CHECK(contains(france, {10, 10}));
  CHECK_FALSE(contains(france, {50, 10}));  // upper edge belongs to belgium
  CHECK(contains(belgium, {50, 10}));
  CHECK(contains(ruex, {4.999, 4.999}));
  CHECK_FALSE(contains(ruex, {5.0, 4.999}));
}

TEST_CASE("resolve_deepest descends to the deepest containing region") {
  WorldTree world = fixtures::world1();

  CHECK(resolve_deepest(world, {2, 2}) == RegionId("rue-x"));
  // no child of france contains (10, 60)
  CHECK(resolve_deepest(world, {10, 60}) == RegionId("france"));
  CHECK(resolve_deepest(world, {99, 99}) == RegionId("belgium"));
  CHECK_FALSE(resolve_deepest(world, {-1, 2}).has_value());

  for (GeoPoint p : {GeoPoint{2, 2}, GeoPoint{10, 60}, GeoPoint{99, 99}}) {
    CHECK(resolve_deepest(world, p) == oracle::scan_deepest(world, p));
  }
}

TEST_CASE("region_path runs from root to the deepest region") {
  WorldTree world = fixtures::world1();

  CHECK(region_path(world, {2, 2}) ==
        std::vector<RegionId>{"world", "france", "paris", "rue-x"});
  CHECK(region_path(world, {60, 10}) ==
        std::vector<RegionId>{"world", "belgium", "brussels"});
  CHECK(region_path(world, {10, 60}) ==
        std::vector<RegionId>{"world", "france"});
  CHECK(region_path(world, {200, 0}).empty());
}

TEST_CASE("deepest_container finds the smallest region holding a rectangle") {
  WorldTree world = fixtures::world1();

  CHECK(deepest_container(world, RegionId("rue-x")) == RegionId("rue-x"));
  CHECK_FALSE(deepest_container(world, RegionId("nowhere")).has_value());

  CHECK(deepest_container(world, Rect{1, 2, 1, 2}) == RegionId("rue-x"));
  // straddles france and belgium
  CHECK(deepest_container(world, Rect{20, 60, 0, 10}) == RegionId("world"));
  CHECK_FALSE(deepest_container(world, Rect{-5, 5, 0, 10}).has_value());

  CHECK(deepest_container(world, Rect{1, 2, 1, 2}) ==
        oracle::scan_container(world, Rect{1, 2, 1, 2}));
  CHECK(deepest_container(world, Rect{20, 60, 0, 10}) ==
        oracle::scan_container(world, Rect{20, 60, 0, 10}));
}

TEST_CASE("transition_count counts ancestor changes at a depth") {
  WorldTree world = fixtures::world1();
  const std::vector<GeoPoint> stationary{{2, 2}, {2, 2}, {2, 2}};
  for (int d = 0; d <= 5; ++d) {
    CHECK(transition_count(world, stationary, d) == std::size_t{0});
  }

  const std::vector<GeoPoint> moving{{2, 2}, {10, 60}, {60, 10}};
  CHECK(transition_count(world, moving, 0) == std::size_t{0});
  CHECK(transition_count(world, moving, 1) == std::size_t{1});
  CHECK(transition_count(world, moving, 2) == std::size_t{2});
  for (int d = 0; d <= 4; ++d) {
    CHECK(transition_count(world, moving, d) ==
          oracle::scan_transition_count(world, moving, d));
  }

  const std::vector<GeoPoint> outside{{2, 2}, {150, 0}};
  CHECK_FALSE(transition_count(world, outside, 0).has_value());
}

TEST_CASE("shallow leaves reuse their deepest ancestor") {
  WorldTree world = fixtures::world1();
  // (10, 60) only reaches depth 1; deeper queries return france itself
  CHECK(ancestor_at_depth(world, {10, 60}, 5) == RegionId("france"));
  CHECK(ancestor_at_depth(world, {2, 2}, 1) == RegionId("france"));
}

TEST_CASE("world construction rejects invariant violations") {
  CHECK_THROWS_WITH(WorldTree::build({
                        {"a", std::nullopt, {0, 10, 0, 10}},
                        {"a", std::nullopt, {0, 10, 0, 10}},
                    }),
                    Catch::Matchers::ContainsSubstring("duplicate region"));
  CHECK_THROWS_WITH(WorldTree::build({
                        {"a", std::nullopt, {0, 10, 0, 10}},
                        {"b", "ghost", {0, 1, 0, 1}},
                    }),
                    Catch::Matchers::ContainsSubstring("ghost"));
  CHECK_THROWS_WITH(WorldTree::build({
                        {"a", std::nullopt, {0, 10, 0, 10}},
                        {"b", std::nullopt, {20, 30, 0, 10}},
                    }),
                    Catch::Matchers::ContainsSubstring("exactly one root"));
  // child escaping its parent
  CHECK_THROWS_WITH(WorldTree::build({
                        {"a", std::nullopt, {0, 10, 0, 10}},
                        {"b", "a", {5, 15, 0, 10}},
                    }),
                    Catch::Matchers::ContainsSubstring("escapes"));
  // overlapping siblings are reported with both ids
  CHECK_THROWS_WITH(WorldTree::build({
                        {"a", std::nullopt, {0, 10, 0, 10}},
                        {"b", "a", {0, 5, 0, 10}},
                        {"c", "a", {4, 8, 0, 10}},
                    }),
                    Catch::Matchers::ContainsSubstring("'b' and 'c'"));
  // a parent cycle is unreachable from the root
  CHECK_THROWS_WITH(WorldTree::build({
                        {"a", std::nullopt, {0, 10, 0, 10}},
                        {"b", "c", {0, 5, 0, 5}},
                        {"c", "b", {0, 5, 0, 5}},
                    }),
                    Catch::Matchers::ContainsSubstring("not reachable"));
  CHECK_THROWS_WITH(WorldTree::build({{"a", std::nullopt, {10, 0, 0, 10}}}),
                    Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("world loader round-trips the text format") {
  const std::string text =
      "# comment\n"
      "world   -      0 100 0 100\n"
      "france  world  0  50 0 100\n";
  WorldTree world = load_world(text);
  CHECK(world.root() == "world");
  CHECK(world.regions().size() == 2);
  CHECK(world.at("france").depth == 1);

  CHECK_THROWS_WITH(load_world("world - 0 100 0\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(load_world("world - 0 x 0 100\n"),
                    Catch::Matchers::ContainsSubstring("lat_max"));
}

TEST_CASE("random worlds: resolution agrees with the exhaustive scan") {
  std::mt19937 rng(12345);
  for (int w = 0; w < 10; ++w) {
    WorldTree world = gen::random_world(rng);
    for (int i = 0; i < 100; ++i) {
      GeoPoint p{gen::uniform(rng, 0, 80), gen::uniform(rng, 0, 160)};
      auto fast = resolve_deepest(world, p);
      auto slow = oracle::scan_deepest(world, p);
      REQUIRE(fast == slow);

      auto path = region_path(world, p);
      REQUIRE_FALSE(path.empty());
      CHECK(path.back() == *fast);
      CHECK(path.front() == world.root());
      for (std::size_t j = 1; j < path.size(); ++j) {
        CHECK(world.at(path[j]).parent == path[j - 1]);
      }
    }
  }
}

TEST_CASE("transition counts are monotone in depth") {
  std::mt19937 rng(99);
  for (int w = 0; w < 10; ++w) {
    WorldTree world = gen::random_world(rng);
    auto trace = gen::random_trace(rng, world, 200);
    for (int d = 0; d < world.max_depth() + 2; ++d) {
      auto lo = transition_count(world, trace, d);
      auto hi = transition_count(world, trace, d + 1);
      REQUIRE(lo.has_value());
      REQUIRE(hi.has_value());
      CHECK(*lo <= *hi);
    }
  }
}

TEST_CASE("haversine distance matches reference values") {
  // ~111.19 km per degree of latitude on the R = 6371 km sphere
  CHECK_THAT(haversine_m({48.0, 11.0}, {48.0005, 11.0}),
             Catch::Matchers::WithinAbs(55.6, 0.05));
  CHECK_THAT(haversine_m({48.0, 11.0}, {48.0010, 11.0}),
             Catch::Matchers::WithinAbs(111.2, 0.05));
  CHECK(haversine_m({0, 0}, {0, 0}) == 0.0);

  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    GeoPoint a{gen::uniform(rng, -89, 89), gen::uniform(rng, -179, 179)};
    GeoPoint b{gen::uniform(rng, -89, 89), gen::uniform(rng, -179, 179)};
    CHECK_THAT(haversine_m(a, b),
               Catch::Matchers::WithinRel(oracle::haversine_reference_m(a, b),
                                          1e-9));
  }
}

TEST_CASE("geographic range check") {
  CHECK(is_geographic({48.1, 11.5}));
  CHECK_FALSE(is_geographic({99, 99}));
  CHECK_FALSE(is_geographic({0, 180.0}));
  CHECK(is_finite({99, 99}));
}
