#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gloss/oracles.hpp"
#include "gloss/services.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

using namespace gloss;

namespace {

HearsayRecord cafe_record(const std::string& id = "h1",
                          const RegionId& where = "rue-x") {
  HearsayRecord r;
  r.hearsay_id = id;
  r.where = where;
  r.predicate.required_tags = {"cafe"};
  r.info = "try the cafe on the corner";
  r.depositor = "anna";
  r.inserted_at = 1;
  return r;
}

ProfileAccess fixed_profile(const Profile& p) {
  return [p](const NodeId&, const UserId&, Tick) {
    return std::optional<Profile>(p);
  };
}

}  // namespace

TEST_CASE("profile matching is required-tag subset") {
  Profile bob = fixtures::bob_profile();

  CHECK(matches(bob, ProfilePredicate{{"cafe"}}));
  CHECK_FALSE(matches(bob, ProfilePredicate{{"opera"}}));
  CHECK(matches(bob, ProfilePredicate{{}}));  // empty matches everyone
  CHECK(matches(bob, ProfilePredicate{{"cafe", "jazz"}}));
  CHECK_FALSE(matches(bob, ProfilePredicate{{"cafe", "opera"}}));
}

TEST_CASE("insertion is stored on the node for the where") {
  Network net = fixtures::network1();

  SECTION("an owned where stores on its own node, from anywhere") {
    InsertResult r = hearsay_insert(net, "world-node", cafe_record(), "m1");
    CHECK(r.status == InsertResult::Status::Ok);
    CHECK(r.placed_at == "rue-x-node");
    CHECK(net.node("rue-x-node").hearsay.records.count("h1") == 1);
  }

  SECTION("an unowned where stores on the deepest owning ancestor") {
    Network sparse = fixtures::network1_sparse();
    InsertResult r =
        hearsay_insert(sparse, "brussels-node", cafe_record("h2", "paris"),
                       "m1");
    CHECK(r.status == InsertResult::Status::Ok);
    CHECK(r.placed_at == "france-node");
  }

  SECTION("inserting at the placement node takes zero hops") {
    InsertResult r = hearsay_insert(net, "rue-x-node", cafe_record(), "m1");
    CHECK(r.placed_at == "rue-x-node");
    CHECK(r.trace.order == std::vector<NodeId>{"rue-x-node"});
    CHECK(r.trace.delivered_hops == 0);
  }

  SECTION("unknown where") {
    InsertResult r =
        hearsay_insert(net, "world-node", cafe_record("h3", "atlantis"), "m1");
    CHECK(r.status == InsertResult::Status::UnknownWhere);
  }

  SECTION("duplicate hearsay ids are rejected") {
    hearsay_insert(net, "world-node", cafe_record(), "m1");
    CHECK_THROWS_WITH(hearsay_insert(net, "world-node", cafe_record(), "m2"),
                      Catch::Matchers::ContainsSubstring("duplicate hearsay"));
  }
}

TEST_CASE("placement equals the exhaustive-scan owner on random worlds") {
  std::mt19937 rng(909);
  for (int round = 0; round < 100; ++round) {
    WorldTree world = gen::random_world(rng, 4, 3);
    Network net = gen::random_network(rng, world, 0.5);
    RegionId where = gen::random_region(rng, world);
    NodeId origin = gen::random_node(rng, net);

    InsertResult r = hearsay_insert(
        net, origin, cafe_record("h" + std::to_string(round), where), "m");
    REQUIRE(r.status == InsertResult::Status::Ok);
    CHECK(r.placed_at == oracle::scan_owning_node(net, where));

    // store locality invariant holds after every insert
    for (const auto& [id, node] : net.nodes()) {
      for (const auto& [hid, rec] : node.hearsay.records) {
        CHECK(in_subtree(world, node.managed, rec.where));
      }
    }
  }
}

TEST_CASE("entering a where delivers matching hearsay exactly once") {
  Network net = fixtures::network1();
  hearsay_insert(net, "world-node", cafe_record(), "m1");
  Profile bob = fixtures::bob_profile();

  EnterResult first = hearsay_on_enter(net, "rue-x-node", "bob", "rue-x", 4,
                                       fixed_profile(bob));
  REQUIRE(first.notices.size() == 1);
  CHECK(first.notices[0].hearsay_id == "h1");
  CHECK(first.notices[0].info == "try the cafe on the corner");
  CHECK(first.notices[0].recipient == "bob");

  EnterResult again = hearsay_on_enter(net, "rue-x-node", "bob", "rue-x", 9,
                                       fixed_profile(bob));
  CHECK(again.notices.empty());

  Profile carol;
  carol.user = "carol";
  carol.tags = {"shopping"};
  carol.contacts = {"sms"};
  carol.home = "brussels-node";
  std::vector<MatchAuditEntry> audit;
  EnterResult other = hearsay_on_enter(net, "rue-x-node", "carol", "rue-x", 5,
                                       fixed_profile(carol), &audit);
  CHECK(other.notices.empty());
  REQUIRE(audit.size() == 1);
  CHECK(audit[0].node == "rue-x-node");
  CHECK_FALSE(audit[0].matched);
}

TEST_CASE("a record fires for entries into descendants of its where") {
  Network sparse = fixtures::network1_sparse();
  // paris is unowned, so the record lands on france-node
  hearsay_insert(sparse, "brussels-node", cafe_record("h1", "paris"), "m1");
  Profile bob = fixtures::bob_profile();

  // bob is detected deeper, in paris, which resolves to france-node too
  EnterResult r = hearsay_on_enter(sparse, "france-node", "bob", "paris", 4,
                                   fixed_profile(bob));
  CHECK(r.notices.size() == 1);

  // entering the enclosing region does not fire a deeper record
  Profile dave = fixtures::bob_profile();
  dave.user = "dave";
  EnterResult none = hearsay_on_enter(sparse, "france-node", "dave", "france",
                                      5, fixed_profile(dave));
  CHECK(none.notices.empty());
}

TEST_CASE("profile unavailability drops the entry event") {
  Network net = fixtures::network1();
  hearsay_insert(net, "world-node", cafe_record(), "m1");
  EnterResult r = hearsay_on_enter(
      net, "rue-x-node", "bob", "rue-x", 4,
      [](const NodeId&, const UserId&, Tick) {
        return std::optional<Profile>();
      });
  CHECK_FALSE(r.profile_ok);
  CHECK(r.notices.empty());
  // nothing was marked delivered
  CHECK(net.node("rue-x-node").hearsay.delivered.empty());
}

TEST_CASE("notification walks the contact list in order") {
  Profile bob = fixtures::bob_profile();
  bob.contacts = {"sms", "gprs"};
  HearsayNoticePayload notice{"h1", "info", "bob"};

  int sms_sent = 0;
  int gprs_sent = 0;
  ChannelRegistry channels;
  channels["sms"] = {true, [&](const HearsayNoticePayload&) {
                       ++sms_sent;
                       return true;
                     }};
  channels["gprs"] = {true, [&](const HearsayNoticePayload&) {
                        ++gprs_sent;
                        return true;
                      }};

  SECTION("the first live channel wins") {
    NotifyResult r = hearsay_notify(bob, notice, channels);
    CHECK(r.delivered);
    CHECK(r.channel == "sms");
    CHECK(sms_sent == 1);
    CHECK(gprs_sent == 0);
  }

  SECTION("a downed channel falls through to the next") {
    channels["sms"].up = false;
    NotifyResult r = hearsay_notify(bob, notice, channels);
    CHECK(r.delivered);
    CHECK(r.channel == "gprs");
    CHECK(sms_sent == 0);
    CHECK(gprs_sent == 1);
  }

  SECTION("all channels down reports failure") {
    channels["sms"].up = false;
    channels["gprs"].up = false;
    NotifyResult r = hearsay_notify(bob, notice, channels);
    CHECK_FALSE(r.delivered);
  }

  SECTION("a send that reports failure falls through too") {
    channels["sms"].send = [](const HearsayNoticePayload&) { return false; };
    NotifyResult r = hearsay_notify(bob, notice, channels);
    CHECK(r.delivered);
    CHECK(r.channel == "gprs");
  }

  SECTION("unregistered contacts are skipped") {
    bob.contacts = {"pigeon", "sms"};
    NotifyResult r = hearsay_notify(bob, notice, channels);
    CHECK(r.channel == "sms");
  }
}
