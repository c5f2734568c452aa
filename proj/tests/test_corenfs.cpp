#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "confcore/nf/aka.hpp"
#include "confcore/ran/ransim.hpp"
#include "confcore/testbed.hpp"

using namespace confcore;

namespace {

nf::CoreEnv bare_env(sbi::Transport& transport, const Clock& clock) {
  nf::CoreEnv env;
  env.transport = &transport;
  env.clock = &clock;
  env.mode = sbi::ChannelMode::Plain;
  return env;
}

std::vector<std::string> sorted_ids(const std::vector<nf::NfProfile>& profiles) {
  std::vector<std::string> ids;
  for (const auto& p : profiles) ids.push_back(p.instance_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::unique_ptr<testbed::Core> make_plain_core(std::uint64_t seed = 1) {
  testbed::Core::Options opts;
  opts.mode = sbi::ChannelMode::Plain;
  opts.seed = seed;
  return std::make_unique<testbed::Core>(testbed::Topology::standard(), std::move(opts));
}

}  // namespace

TEST_CASE("subscriber generation is deterministic with unique SUPIs") {
  auto a = nf::generate_subscribers(1000, 42);
  auto b = nf::generate_subscribers(1000, 42);
  auto c = nf::generate_subscribers(1000, 43);
  REQUIRE(a.size() == 1000);
  std::set<std::string> supis;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].supi == b[i].supi);
    CHECK(a[i].k == b[i].k);
    CHECK(a[i].sqn == b[i].sqn);
    CHECK(a[i].k.size() == nf::aka::kKeySize);
    CHECK(a[i].sqn < 1000);
    supis.insert(a[i].supi);
  }
  CHECK(supis.size() == 1000);
  CHECK(a[0].k != c[0].k);  // different seed, different key material
}

TEST_CASE("SUCI conceal/deconceal round-trips and stays fresh") {
  auto home = crypto::make_exchange_keypair();
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    std::string supi = "imsi-00101" + std::to_string(rng.next_u64());
    nf::Suci suci = nf::conceal_supi(supi, "home-key-1", home.public_key);
    auto result = nf::deconceal_supi(suci, "home-key-1", home.secret_key);
    CHECK(result.error == nf::DeconcealError::None);
    CHECK(result.supi == supi);
  }

  // Freshness: concealing the same SUPI twice never yields the same ciphertext.
  nf::Suci s1 = nf::conceal_supi("imsi-001010000000001", "home-key-1", home.public_key);
  nf::Suci s2 = nf::conceal_supi("imsi-001010000000001", "home-key-1", home.public_key);
  CHECK(s1.ephemeral_pubkey != s2.ephemeral_pubkey);
  CHECK(s1.ciphertext != s2.ciphertext);

  // Wire round trip.
  nf::Suci back = nf::Suci::parse(s1.serialize());
  CHECK(back.serialize() == s1.serialize());
  CHECK(nf::deconceal_supi(back, "home-key-1", home.secret_key).supi ==
        "imsi-001010000000001");
}

TEST_CASE("SUCI tampering and key mismatch are rejected before decryption") {
  auto home = crypto::make_exchange_keypair();
  nf::Suci suci = nf::conceal_supi("imsi-001010000000007", "home-key-1", home.public_key);

  CHECK(nf::deconceal_supi(suci, "home-key-2", home.secret_key).error ==
        nf::DeconcealError::UnknownKeyId);

  auto flipped = suci;
  flipped.ciphertext[0] ^= 0x01;
  CHECK(nf::deconceal_supi(flipped, "home-key-1", home.secret_key).error ==
        nf::DeconcealError::MacFailure);

  flipped = suci;
  flipped.mac[0] ^= 0x01;
  CHECK(nf::deconceal_supi(flipped, "home-key-1", home.secret_key).error ==
        nf::DeconcealError::MacFailure);

  auto other = crypto::make_exchange_keypair();
  CHECK(nf::deconceal_supi(suci, "home-key-1", other.secret_key).error ==
        nf::DeconcealError::MacFailure);
}

TEST_CASE("network and UE derivations agree byte-for-byte over 1000 random inputs") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    Bytes k = rng.next_bytes(nf::aka::kKeySize);
    Bytes rand = rng.next_bytes(nf::aka::kRandSize);
    std::uint64_t sqn = rng.next_below(nf::aka::kSqnMask);
    Bytes amf_field{0x80, 0x00};

    CHECK(nf::aka::f1(k, sqn, amf_field, rand) == ran::uekdf::mac_a(k, sqn, amf_field, rand));
    CHECK(nf::aka::f2(k, rand) == ran::uekdf::res(k, rand));
    CHECK(nf::aka::f5(k, rand) == ran::uekdf::ak(k, rand));
    CHECK(nf::aka::f1_star(k, sqn, rand) == ran::uekdf::mac_s(k, sqn, rand));
    CHECK(nf::aka::derive_kausf(k, rand, sqn) == ran::uekdf::kausf(k, rand, sqn));
    CHECK(nf::aka::derive_kseaf(nf::aka::derive_kausf(k, rand, sqn), "5G:net") ==
          ran::uekdf::kseaf(nf::aka::derive_kausf(k, rand, sqn), "5G:net"));
  }
}

TEST_CASE("a wrong long-term key never produces the expected response (1000 trials)") {
  Rng rng(31);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    Bytes k = rng.next_bytes(nf::aka::kKeySize);
    Bytes wrong = rng.next_bytes(nf::aka::kKeySize);
    Bytes rand = rng.next_bytes(nf::aka::kRandSize);
    if (nf::aka::f2(k, rand) != ran::uekdf::res(wrong, rand)) ++mismatches;
  }
  CHECK(mismatches == 1000);
}

TEST_CASE("authentication vector structure matches an independent reconstruction") {
  Rng rng(7);
  Bytes k = rng.next_bytes(nf::aka::kKeySize);
  Bytes rand = rng.next_bytes(nf::aka::kRandSize);
  std::uint64_t sqn = 4711;
  auto v = nf::aka::generate_vector(k, sqn, rand);
  REQUIRE(v.autn.size() == 16);

  Bytes ak = nf::aka::f5(k, rand);
  Bytes sqn_bytes = nf::aka::encode_sqn(sqn);
  for (int i = 0; i < 6; ++i) CHECK((v.autn[i] ^ ak[i]) == sqn_bytes[i]);
  CHECK(v.autn[6] == 0x80);
  CHECK(v.autn[7] == 0x00);
  Bytes mac(v.autn.begin() + 8, v.autn.end());
  CHECK(mac == nf::aka::f1(k, sqn, Bytes{0x80, 0x00}, rand));
  CHECK(v.xres_star == nf::aka::f2(k, rand));

  // UE side can unmask the sequence number from autn alone.
  std::uint64_t recovered = 0;
  for (int i = 0; i < 6; ++i) recovered = (recovered << 8) | (v.autn[i] ^ ak[i]);
  CHECK(recovered == sqn);
}

TEST_CASE("UE challenge response: accept, resync, and tamper cases") {
  Rng rng(12);
  ran::SimUe ue;
  ue.supi = "imsi-001010000000001";
  ue.k = rng.next_bytes(nf::aka::kKeySize);
  ue.sqn = 100;
  Bytes rand = rng.next_bytes(nf::aka::kRandSize);

  auto challenge_for = [&](std::uint64_t net_sqn) {
    auto v = nf::aka::generate_vector(ue.k, net_sqn, rand);
    return nf::UeChallenge{v.rand, v.autn};
  };

  // Fresh challenge: accepted, sqn follows the network.
  auto resp = ue.respond_challenge(challenge_for(101));
  CHECK_FALSE(resp.sync_failure);
  CHECK(ue.last_mac_valid);
  CHECK(resp.res == nf::aka::f2(ue.k, rand));
  CHECK(ue.sqn == 101);

  // Replayed (non-advancing) sqn: resync with an authenticated AUTS.
  resp = ue.respond_challenge(challenge_for(101));
  CHECK(resp.sync_failure);
  CHECK(resp.ue_sqn == 101);
  CHECK(resp.auts_mac == nf::aka::f1_star(ue.k, 101, rand));

  // Jump beyond the resync window: also resync.
  resp = ue.respond_challenge(challenge_for(101 + nf::aka::kResyncWindow + 1));
  CHECK(resp.sync_failure);

  // Edge of the window is accepted.
  resp = ue.respond_challenge(challenge_for(101 + nf::aka::kResyncWindow));
  CHECK_FALSE(resp.sync_failure);
  CHECK(ue.sqn == 101 + nf::aka::kResyncWindow);

  // Tampered MAC: flagged, never resynced, response computed for the network
  // to reject.
  auto bad = challenge_for(ue.sqn + 1);
  bad.autn[10] ^= 0x01;
  resp = ue.respond_challenge(bad);
  CHECK_FALSE(ue.last_mac_valid);
  CHECK_FALSE(resp.sync_failure);
}

TEST_CASE("NRF registry agrees with a mirror map over 2000 random operations") {
  sbi::Transport transport;
  SimClock clock;
  nf::Nrf nrf(bare_env(transport, clock), "nrf-1", "nrf.core");

  struct MirrorEntry {
    nf::NfProfile profile;
    bool registered = false;
  };
  std::map<std::string, MirrorEntry> mirror;
  mirror["nrf-1"] = {nf::NfProfile{"nrf-1", "NRF", {"nnrf-nfm", "nnrf-disc", "nnrf-token"},
                                   "nrf.core"},
                     true};

  const std::vector<std::string> services = {"s-a", "s-b", "s-c", "s-d", "s-e"};
  const std::vector<std::string> types = {"UDM", "SMF", "AUSF"};
  Rng rng(555);
  int conflicts = 0;

  for (int op = 0; op < 2000; ++op) {
    std::string id = "nf-" + std::to_string(rng.next_below(30));
    switch (rng.next_below(4)) {
      case 0: {  // register
        nf::NfProfile p;
        p.instance_id = id;
        p.nf_type = types[rng.next_below(types.size())];
        p.services = {services[rng.next_below(services.size())]};
        p.endpoint = id + "-ep" + std::to_string(rng.next_below(3));
        auto it = mirror.find(id);
        bool expect_conflict =
            it != mirror.end() && it->second.registered && !it->second.profile.same_content(p);
        if (expect_conflict) {
          try {
            nrf.register_profile(p);
            FAIL("expected DuplicateInstanceConflict for " << id);
          } catch (const nf::NfError& e) {
            CHECK(e.code() == "DuplicateInstanceConflict");
            ++conflicts;
          }
        } else {
          nrf.register_profile(p);
          mirror[id] = {p, true};
        }
        break;
      }
      case 1: {  // deregister
        nrf.deregister(id);
        auto it = mirror.find(id);
        if (it != mirror.end()) it->second.registered = false;
        break;
      }
      case 2: {  // discover
        const std::string& svc = services[rng.next_below(services.size())];
        std::vector<std::string> expect;
        for (const auto& [mid, e] : mirror)
          if (e.registered && std::find(e.profile.services.begin(), e.profile.services.end(),
                                        svc) != e.profile.services.end())
            expect.push_back(mid);
        CHECK(sorted_ids(nrf.discover(svc)) == expect);
        break;
      }
      case 3: {  // lookup + count
        auto got = nrf.lookup(id);
        auto it = mirror.find(id);
        if (it == mirror.end()) {
          CHECK_FALSE(got.has_value());
        } else {
          REQUIRE(got.has_value());
          CHECK(got->same_content(it->second.profile));
          CHECK((got->status == nf::NfStatus::Registered) == it->second.registered);
        }
        std::size_t expect_count = 0;
        for (const auto& [mid, e] : mirror)
          if (e.registered) ++expect_count;
        CHECK(nrf.registered_count() == expect_count);
        break;
      }
    }
  }
  CHECK(conflicts > 0);  // the op mix actually exercised the conflict path
}

TEST_CASE("token issuance: requester and scope checks, then verifiable tokens") {
  sbi::Transport transport;
  SimClock clock;
  clock.set(1000);
  nf::Nrf nrf(bare_env(transport, clock), "nrf-1", "nrf.core");

  try {
    nrf.issue_token("ghost", "NRF", {"nnrf-disc"}, false);
    FAIL("unknown requester must be rejected");
  } catch (const nf::NfError& e) {
    CHECK(e.code() == "UnknownRequester");
  }

  try {
    nrf.issue_token("ghost", "UDM", {"nudm-sdm"}, true);
    FAIL("scope without a registered producer must be rejected");
  } catch (const nf::NfError& e) {
    CHECK(e.code() == "ScopeNotOffered");
  }

  nf::NfProfile udm;
  udm.instance_id = "udm-1";
  udm.nf_type = "UDM";
  udm.services = {"nudm-ueau", "nudm-sdm"};
  udm.endpoint = "udm.core";
  nrf.register_profile(udm);

  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> scope = {rng.next_below(2) ? "nudm-ueau" : "nudm-sdm"};
    auto tok = nrf.issue_token("udm-1", "UDM", scope, false);
    CHECK(sbi::verify_token(tok, scope[0], "UDM", nrf.token_pubkey(), clock.now_ms()) ==
          sbi::TokenReject::None);
    CHECK(sbi::verify_token(sbi::AccessToken::parse(tok.serialize()), scope[0], "UDM",
                            nrf.token_pubkey(), clock.now_ms()) == sbi::TokenReject::None);
  }
}

TEST_CASE("full core: UE registration succeeds end to end") {
  auto core = make_plain_core();
  core->udm()->create_subscribers(5, 7);
  auto pop = ran::UePopulation::spawn(5, 7);
  pop.crosscheck(*core->udm());

  ran::StormOptions opts;
  auto records = ran::registration_storm(pop, *core->amf(), *core->udm(), opts);
  REQUIRE(records.size() == 5);
  for (const auto& r : records) {
    CHECK(r.success);
    CHECK(core->amf()->has_security_context(r.supi));
  }
  for (const auto& ue : pop.ues) {
    CHECK(ue.state == ran::UeState::Registered);
    CHECK_FALSE(ue.session_id.empty());
    // The UDM advanced its sequence number in lockstep with the UE.
    CHECK(core->udm()->find_subscriber(ue.supi)->sqn == ue.sqn);
  }
}

TEST_CASE("full core: authentication advances the sequence number by exactly one") {
  auto core = make_plain_core();
  core->udm()->create_subscribers(1, 7);
  auto pop = ran::UePopulation::spawn(1, 7);
  std::uint64_t sqn_before = core->udm()->find_subscriber(pop.ues[0].supi)->sqn;

  ran::StormOptions opts;
  auto records = ran::registration_storm(pop, *core->amf(), *core->udm(), opts);
  REQUIRE(records[0].success);
  CHECK(core->udm()->find_subscriber(pop.ues[0].supi)->sqn == sqn_before + 1);
}

TEST_CASE("full core: a desynchronized UE recovers through resync") {
  auto core = make_plain_core();
  core->udm()->create_subscribers(1, 7);
  auto pop = ran::UePopulation::spawn(1, 7);
  ran::SimUe& ue = pop.ues[0];
  ue.sqn += 100;  // UE far ahead of the network: first challenge looks stale

  nf::Suci suci = ue.conceal(core->udm()->home_key_id(), core->udm()->home_pubkey());
  auto result = core->amf()->ue_register(
      suci, [&ue](const nf::UeChallenge& c) { return ue.respond_challenge(c); });
  REQUIRE(result.success);
  // Resync snapped the UDM to the UE's counter; the retry advanced it by one.
  CHECK(core->udm()->find_subscriber(ue.supi)->sqn == ue.sqn);
}

TEST_CASE("full core: a corrupted long-term key fails authentication, sqn untouched") {
  auto core = make_plain_core();
  core->udm()->create_subscribers(2, 7);
  auto pop = ran::UePopulation::spawn(2, 7);
  pop.ues[0].k[0] ^= 0xFF;
  std::uint64_t sqn_before = core->udm()->find_subscriber(pop.ues[0].supi)->sqn;

  ran::StormOptions opts;
  auto records = ran::registration_storm(pop, *core->amf(), *core->udm(), opts);
  REQUIRE(records.size() == 2);
  CHECK_FALSE(records[0].success);
  CHECK(records[0].failed_stage == "auth");
  CHECK(records[1].success);  // only the corrupted UE fails
  CHECK(core->udm()->find_subscriber(pop.ues[0].supi)->sqn == sqn_before);
}

TEST_CASE("full core: an unknown subscriber is rejected during authentication") {
  auto core = make_plain_core();
  core->udm()->create_subscribers(1, 7);
  ran::SimUe ghost;
  ghost.supi = "imsi-00101999999999";
  ghost.k = Bytes(16, 0x42);
  nf::Suci suci = ghost.conceal(core->udm()->home_key_id(), core->udm()->home_pubkey());
  auto result = core->amf()->ue_register(
      suci, [&ghost](const nf::UeChallenge& c) { return ghost.respond_challenge(c); });
  CHECK_FALSE(result.success);
  CHECK(result.failed_stage == "auth");
  CHECK(result.error_code == "UnknownSubscriber");
}

TEST_CASE("UDM persists to disk and re-imports the same records") {
  namespace fs = std::filesystem;
  fs::path db = fs::temp_directory_path() / "confcore-test-udm.db";
  fs::remove(db);

  {
    testbed::Core::Options opts;
    opts.mode = sbi::ChannelMode::Plain;
    opts.udm_db_path = db.string();
    testbed::Core core(testbed::Topology::standard(), std::move(opts));
    core.udm()->create_subscribers(10, 99);
    CHECK(core.udm()->subscriber_count() == 10);
  }

  auto core = make_plain_core();
  CHECK(core->udm()->subscriber_count() == 0);
  CHECK(core->udm()->import_file(db.string()) == 10);
  CHECK(core->udm()->subscriber_count() == 10);
  for (const auto& rec : nf::generate_subscribers(10, 99)) {
    auto found = core->udm()->find_subscriber(rec.supi);
    REQUIRE(found.has_value());
    CHECK(found->k == rec.k);
    CHECK(found->sqn == rec.sqn);
  }
  fs::remove(db);

  CHECK_THROWS_AS(core->udm()->import_file("/nonexistent/path.db"), nf::NfError);
}

TEST_CASE("discovery excludes deregistered producers") {
  auto core = make_plain_core();
  CHECK_FALSE(core->nrf()->discover("nsmf-pdusession").empty());
  core->amf()->call(core->env().nrf_address, "nnrf-nfm", "deregister",
                   nf::Json{{"instance_id", "smf-1"}}, "nnrf-nfm", "NRF");
  CHECK(core->nrf()->discover("nsmf-pdusession").empty());
}

TEST_CASE("token-protected services reject requests without a token") {
  auto core = make_plain_core();
  sbi::ChannelIdentity id{"intruder", {}, false};
  sbi::Channel ch = sbi::open_channel(id, core->transport(), "udm.core",
                                      sbi::ChannelMode::Plain, *core->env().reports,
                                      core->clock());
  sbi::SbiMessage msg;
  msg.service = "nudm-sdm";
  msg.path = "get";
  msg.body = nf::json_to_bytes(nf::Json{{"supi", "imsi-x"}});
  try {
    ch.send_request(std::move(msg));
    FAIL("tokenless request must be rejected");
  } catch (const sbi::SbiError& e) {
    CHECK(e.code() == sbi::SbiErrorCode::Unauthorized);
  }
}
