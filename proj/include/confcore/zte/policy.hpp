#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confcore/tee/tee.hpp"

namespace confcore::zte {

/// Dotted-numeric versions; an optional pre-release tag compares lower than
/// the untagged version ("1.2.0-rc1" < "1.2.0").
struct Version {
  std::vector<long> parts;
  std::string prerelease;
};

Version parse_version(std::string_view s);  // throws on non-numeric components
int compare_versions(const Version& a, const Version& b);
int compare_versions(std::string_view a, std::string_view b);

enum class DeploymentClass { OnPremises, PrivateCloud, PublicCloud };

const char* deployment_class_name(DeploymentClass c);
std::optional<DeploymentClass> parse_deployment_class(std::string_view s);

struct PolicyAttributeSet {
  tee::Measurement measurement;
  TimeMs attestation_age_ms = 0;
  tee::FeatureSet platform_features = 0;
  std::map<std::string, std::string> software_manifest;  // component -> version
  std::set<std::string> behavior_flags;
  DeploymentClass deployment_class = DeploymentClass::PublicCloud;
};

struct TrustSession {
  std::string subject;
  std::string resource;  // the one resource this grant covers
  TimeMs granted_at = 0;
  TimeMs ttl_ms = 0;
  PolicyAttributeSet justification;
  bool revoked = false;
};

struct PolicyDocument {
  std::set<tee::Measurement> allowlist;
  tee::FeatureSet required_features = 0;
  TimeMs max_attestation_age_ms = 300'000;
  std::map<std::string, std::string> min_versions;
  // Deployment classes absent from the map are denied.
  std::map<DeploymentClass, bool> deployment_rules;
  TimeMs session_ttl_ms = 60'000;
  std::set<std::string> deny_on_behavior_flags;

  /// Returns human-readable invariant violations; empty means valid.
  std::vector<std::string> validate() const;
};

enum class DenyReason {
  Measurement,
  Features,
  StaleAttestation,
  Version,
  Deployment,
  Behavior,
};

const char* deny_reason_name(DenyReason r);

struct Decision {
  std::optional<TrustSession> session;
  std::vector<DenyReason> reasons;  // every failing check, not just the first
  bool granted() const { return session.has_value(); }
};

/// Pure decision function; Grant iff every check passes. Reasons accumulate.
Decision evaluate(const std::string& subject, const std::string& resource,
                  const PolicyAttributeSet& attrs, const PolicyDocument& policy, TimeMs now);

/// Renewal issues a new session (new granted_at); revocation marks the old one.
Decision reevaluate(TrustSession& session, const PolicyAttributeSet& fresh_attrs,
                    const PolicyDocument& policy, TimeMs now);

/// Validity interval is half-open: [granted_at, granted_at + ttl_ms).
bool session_valid(const TrustSession& session, TimeMs now);

/// Per-resource scoping: a session for resource R never allows R'.
bool access_decision(const TrustSession& session, const std::string& resource, TimeMs now);

/// Flat key-value policy document, one decision per line; unknown keys are
/// rejected (deny-by-default extends to config).
PolicyDocument parse_policy(std::string_view text);  // throws std::invalid_argument
PolicyDocument load_policy_file(const std::string& path);
std::string serialize_policy(const PolicyDocument& policy);

}  // namespace confcore::zte
