#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confcore/zte/policy.hpp"

using namespace confcore;

namespace {

tee::Measurement measurement_from(Rng& rng) {
  tee::Measurement m;
  Bytes raw = rng.next_bytes(32);
  std::copy(raw.begin(), raw.end(), m.digest.begin());
  return m;
}

zte::PolicyAttributeSet random_attrs(Rng& rng) {
  zte::PolicyAttributeSet attrs;
  attrs.measurement = measurement_from(rng);
  attrs.attestation_age_ms = static_cast<TimeMs>(rng.next_below(1'000'000));
  attrs.platform_features = static_cast<tee::FeatureSet>(rng.next_below(8));
  attrs.software_manifest["core"] =
      std::to_string(rng.next_below(3)) + "." + std::to_string(rng.next_below(10));
  if (rng.next_below(2)) attrs.behavior_flags.insert("flag-" + std::to_string(rng.next_below(4)));
  attrs.deployment_class = static_cast<zte::DeploymentClass>(rng.next_below(3));
  return attrs;
}

// A policy the given attrs pass, used as the starting point for tightening.
zte::PolicyDocument matching_policy(const zte::PolicyAttributeSet& attrs) {
  zte::PolicyDocument p;
  p.allowlist = {attrs.measurement};
  p.required_features = attrs.platform_features;
  p.max_attestation_age_ms = attrs.attestation_age_ms + 1000;
  p.session_ttl_ms = std::min<TimeMs>(p.max_attestation_age_ms, 60'000);
  p.deployment_rules[attrs.deployment_class] = true;
  return p;
}

void tighten(zte::PolicyDocument& p, const zte::PolicyAttributeSet& attrs, Rng& rng) {
  switch (rng.next_below(6)) {
    case 0: p.allowlist.clear(); break;
    case 1: p.required_features = tee::kAllFeatures; break;
    case 2: p.max_attestation_age_ms = attrs.attestation_age_ms - 1; break;
    case 3: p.min_versions["core"] = "999.0"; break;
    case 4: p.deployment_rules.erase(attrs.deployment_class); break;
    case 5:
      for (const auto& f : attrs.behavior_flags) p.deny_on_behavior_flags.insert(f);
      p.deployment_rules[attrs.deployment_class] = false;
      break;
  }
}

}  // namespace

TEST_CASE("version comparison: numeric, padded, pre-release") {
  CHECK(zte::compare_versions("1.2.0", "1.2") == 0);
  CHECK(zte::compare_versions("1.10", "1.9") > 0);
  CHECK(zte::compare_versions("2.0", "1.99.99") > 0);
  CHECK(zte::compare_versions("1.2.0-rc1", "1.2.0") < 0);
  CHECK(zte::compare_versions("1.2.0-rc1", "1.2.0-rc2") < 0);
  CHECK(zte::compare_versions("1.2.0-rc1", "1.2.0-rc1") == 0);
  CHECK(zte::compare_versions("1.2.1-rc1", "1.2.0") > 0);
  CHECK_THROWS_AS(zte::parse_version("1.x.0"), std::invalid_argument);
  CHECK_THROWS_AS(zte::parse_version(""), std::invalid_argument);
}

TEST_CASE("grant carries subject, resource, ttl, and the justifying attributes") {
  Rng rng(1);
  auto attrs = random_attrs(rng);
  auto policy = matching_policy(attrs);
  auto d = zte::evaluate("udm-1", "subscriber-db", attrs, policy, 5000);
  REQUIRE(d.granted());
  CHECK(d.reasons.empty());
  CHECK(d.session->subject == "udm-1");
  CHECK(d.session->resource == "subscriber-db");
  CHECK(d.session->granted_at == 5000);
  CHECK(d.session->ttl_ms == policy.session_ttl_ms);
  CHECK(d.session->justification.measurement == attrs.measurement);
}

TEST_CASE("deny by default: 1000 random attribute sets vs an empty policy") {
  zte::PolicyDocument empty;  // nothing allowlisted, no deployment rules
  Rng rng(77);
  int denied = 0;
  for (int i = 0; i < 1000; ++i) {
    auto d = zte::evaluate("s", "r", random_attrs(rng), empty, 0);
    if (!d.granted() && !d.reasons.empty()) ++denied;
  }
  CHECK(denied == 1000);
}

TEST_CASE("tightening a policy never flips a denial to a grant (100 rounds)") {
  Rng rng(31337);
  int still_denied = 0;
  for (int i = 0; i < 100; ++i) {
    auto attrs = random_attrs(rng);
    auto policy = matching_policy(attrs);
    REQUIRE(zte::evaluate("s", "r", attrs, policy, 0).granted());
    // Force a denial, then tighten further 1..3 times.
    policy.allowlist.clear();
    REQUIRE_FALSE(zte::evaluate("s", "r", attrs, policy, 0).granted());
    std::uint64_t rounds = 1 + rng.next_below(3);
    for (std::uint64_t t = 0; t < rounds; ++t) tighten(policy, attrs, rng);
    if (!zte::evaluate("s", "r", attrs, policy, 0).granted()) ++still_denied;
  }
  CHECK(still_denied == 100);
}

TEST_CASE("attestation age boundary: max-1 and max pass, max+1 denies") {
  Rng rng(2);
  auto attrs = random_attrs(rng);
  auto policy = matching_policy(attrs);
  policy.max_attestation_age_ms = 1000;
  policy.session_ttl_ms = 1000;

  attrs.attestation_age_ms = 999;
  CHECK(zte::evaluate("s", "r", attrs, policy, 0).granted());
  attrs.attestation_age_ms = 1000;
  CHECK(zte::evaluate("s", "r", attrs, policy, 0).granted());
  attrs.attestation_age_ms = 1001;
  auto d = zte::evaluate("s", "r", attrs, policy, 0);
  CHECK_FALSE(d.granted());
  CHECK(d.reasons == std::vector{zte::DenyReason::StaleAttestation});
}

TEST_CASE("session validity is half-open: ttl-1 valid, ttl and ttl+1 invalid") {
  zte::TrustSession s;
  s.granted_at = 1000;
  s.ttl_ms = 50;
  CHECK_FALSE(zte::session_valid(s, 999));
  CHECK(zte::session_valid(s, 1000));
  CHECK(zte::session_valid(s, 1049));   // granted_at + ttl - 1
  CHECK_FALSE(zte::session_valid(s, 1050));  // granted_at + ttl
  CHECK_FALSE(zte::session_valid(s, 1051));
  s.revoked = true;
  CHECK_FALSE(zte::session_valid(s, 1000));
}

TEST_CASE("denial lists every failing check, matching a per-check oracle") {
  Rng rng(3);
  auto attrs = random_attrs(rng);
  zte::PolicyDocument policy;  // empty allowlist, empty deployment rules
  policy.required_features = tee::kAllFeatures;
  policy.max_attestation_age_ms = 10;
  policy.min_versions["core"] = "99.0";
  policy.deny_on_behavior_flags = {"debug-attach"};

  attrs.platform_features = 0;
  attrs.attestation_age_ms = 11;
  attrs.behavior_flags = {"debug-attach"};

  auto d = zte::evaluate("s", "r", attrs, policy, 0);
  REQUIRE_FALSE(d.granted());

  // Oracle: recompute each predicate independently.
  std::vector<zte::DenyReason> expected;
  if (!policy.allowlist.contains(attrs.measurement))
    expected.push_back(zte::DenyReason::Measurement);
  if ((attrs.platform_features & policy.required_features) != policy.required_features)
    expected.push_back(zte::DenyReason::Features);
  if (attrs.attestation_age_ms > policy.max_attestation_age_ms)
    expected.push_back(zte::DenyReason::StaleAttestation);
  if (zte::compare_versions(attrs.software_manifest["core"], "99.0") < 0)
    expected.push_back(zte::DenyReason::Version);
  if (!policy.deployment_rules.contains(attrs.deployment_class))
    expected.push_back(zte::DenyReason::Deployment);
  if (attrs.behavior_flags.contains("debug-attach"))
    expected.push_back(zte::DenyReason::Behavior);

  CHECK(d.reasons == expected);
  CHECK(d.reasons.size() == 6);
}

TEST_CASE("reevaluation renews under an unchanged policy and revokes under a tightened one") {
  Rng rng(4);
  auto attrs = random_attrs(rng);
  auto policy = matching_policy(attrs);
  SimClock clock(1000);

  auto d = zte::evaluate("udm-1", "db", attrs, policy, clock.now_ms());
  REQUIRE(d.granted());
  zte::TrustSession session = *d.session;

  clock.advance(500);
  auto renewed = zte::reevaluate(session, attrs, policy, clock.now_ms());
  REQUIRE(renewed.granted());
  CHECK(renewed.session->granted_at == 1500);
  CHECK_FALSE(session.revoked);

  policy.min_versions["core"] = "999.0";
  auto revoked = zte::reevaluate(session, attrs, policy, clock.now_ms());
  CHECK_FALSE(revoked.granted());
  CHECK(revoked.reasons == std::vector{zte::DenyReason::Version});
  CHECK(session.revoked);
  CHECK_FALSE(zte::session_valid(session, clock.now_ms()));
}

TEST_CASE("a session for resource R never authorizes R'") {
  Rng rng(5);
  auto attrs = random_attrs(rng);
  auto policy = matching_policy(attrs);
  auto d = zte::evaluate("amf-1", "resource-R", attrs, policy, 0);
  REQUIRE(d.granted());
  CHECK(zte::access_decision(*d.session, "resource-R", 1));
  CHECK_FALSE(zte::access_decision(*d.session, "resource-Rprime", 1));
  CHECK_FALSE(zte::access_decision(*d.session, "resource-R", d.session->ttl_ms));
}

TEST_CASE("policy text round-trips and rejects unknown keys") {
  Rng rng(6);
  zte::PolicyDocument p;
  p.allowlist = {measurement_from(rng), measurement_from(rng)};
  p.required_features = tee::kMemoryEncryption | tee::kIntegrityProtection;
  p.max_attestation_age_ms = 120'000;
  p.session_ttl_ms = 30'000;
  p.min_versions["core"] = "1.4.0";
  p.deployment_rules[zte::DeploymentClass::OnPremises] = true;
  p.deployment_rules[zte::DeploymentClass::PublicCloud] = false;
  p.deny_on_behavior_flags = {"debug-attach"};

  std::string text = zte::serialize_policy(p);
  zte::PolicyDocument back = zte::parse_policy(text);
  CHECK(zte::serialize_policy(back) == text);
  CHECK(back.allowlist == p.allowlist);
  CHECK(back.required_features == p.required_features);
  CHECK(back.deployment_rules == p.deployment_rules);

  CHECK_NOTHROW(zte::parse_policy("# comment line\n\nsession_ttl_ms 10\n"));
  CHECK_THROWS_AS(zte::parse_policy("allow_everything yes\n"), std::invalid_argument);
  CHECK_THROWS_AS(zte::parse_policy("session_ttl_ms 10 extra\n"), std::invalid_argument);
  CHECK_THROWS_AS(zte::parse_policy("require_feature warp_drive\n"), std::invalid_argument);
  CHECK_THROWS_AS(zte::parse_policy("deployment moon allow\n"), std::invalid_argument);
  CHECK_THROWS_AS(zte::parse_policy("max_attestation_age_ms -5\n"), std::invalid_argument);
}

TEST_CASE("policy validation reports internal inconsistencies") {
  zte::PolicyDocument p;
  p.session_ttl_ms = 400'000;
  p.max_attestation_age_ms = 300'000;
  auto v = p.validate();
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "session_ttl_ms exceeds max_attestation_age_ms");

  p.session_ttl_ms = 0;
  CHECK(p.validate() == std::vector<std::string>{"session_ttl_ms must be positive"});

  p.session_ttl_ms = 1000;
  p.min_versions["core"] = "not-a-version";
  CHECK(p.validate() == std::vector<std::string>{"unparseable min_version for core"});
  CHECK(zte::PolicyDocument{}.validate().empty());
}
