#include "confcore/zte/policy.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace confcore::zte {

Version parse_version(std::string_view s) {
  Version v;
  auto dash = s.find('-');
  if (dash != std::string_view::npos) {
    v.prerelease = std::string(s.substr(dash + 1));
    s = s.substr(0, dash);
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    auto dot = s.find('.', start);
    std::string_view part = s.substr(start, dot == std::string_view::npos ? s.size() - start
                                                                          : dot - start);
    long value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size())
      throw std::invalid_argument("bad version component: " + std::string(part));
    v.parts.push_back(value);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return v;
}

int compare_versions(const Version& a, const Version& b) {
  std::size_t n = std::max(a.parts.size(), b.parts.size());
  for (std::size_t i = 0; i < n; ++i) {
    long av = i < a.parts.size() ? a.parts[i] : 0;
    long bv = i < b.parts.size() ? b.parts[i] : 0;
    if (av != bv) return av < bv ? -1 : 1;
  }
  // Same numeric version: pre-release tags sort below the release.
  bool ap = !a.prerelease.empty();
  bool bp = !b.prerelease.empty();
  if (ap != bp) return ap ? -1 : 1;
  if (a.prerelease != b.prerelease) return a.prerelease < b.prerelease ? -1 : 1;
  return 0;
}

int compare_versions(std::string_view a, std::string_view b) {
  return compare_versions(parse_version(a), parse_version(b));
}

const char* deployment_class_name(DeploymentClass c) {
  switch (c) {
    case DeploymentClass::OnPremises: return "on_premises";
    case DeploymentClass::PrivateCloud: return "private_cloud";
    case DeploymentClass::PublicCloud: return "public_cloud";
  }
  return "?";
}

std::optional<DeploymentClass> parse_deployment_class(std::string_view s) {
  if (s == "on_premises") return DeploymentClass::OnPremises;
  if (s == "private_cloud") return DeploymentClass::PrivateCloud;
  if (s == "public_cloud") return DeploymentClass::PublicCloud;
  return std::nullopt;
}

std::vector<std::string> PolicyDocument::validate() const {
  std::vector<std::string> violations;
  if (session_ttl_ms > max_attestation_age_ms)
    violations.push_back("session_ttl_ms exceeds max_attestation_age_ms");
  if (session_ttl_ms <= 0) violations.push_back("session_ttl_ms must be positive");
  if (max_attestation_age_ms <= 0)
    violations.push_back("max_attestation_age_ms must be positive");
  for (const auto& [component, version] : min_versions) {
    try {
      parse_version(version);
    } catch (const std::exception&) {
      violations.push_back("unparseable min_version for " + component);
    }
  }
  return violations;
}

const char* deny_reason_name(DenyReason r) {
  switch (r) {
    case DenyReason::Measurement: return "measurement";
    case DenyReason::Features: return "features";
    case DenyReason::StaleAttestation: return "stale_attestation";
    case DenyReason::Version: return "version";
    case DenyReason::Deployment: return "deployment";
    case DenyReason::Behavior: return "behavior";
  }
  return "?";
}

namespace {
std::vector<DenyReason> failing_checks(const PolicyAttributeSet& attrs,
                                       const PolicyDocument& policy) {
  std::vector<DenyReason> reasons;
  if (!policy.allowlist.contains(attrs.measurement)) reasons.push_back(DenyReason::Measurement);
  if ((attrs.platform_features & policy.required_features) != policy.required_features)
    reasons.push_back(DenyReason::Features);
  if (attrs.attestation_age_ms > policy.max_attestation_age_ms)
    reasons.push_back(DenyReason::StaleAttestation);
  for (const auto& [component, min_version] : policy.min_versions) {
    auto it = attrs.software_manifest.find(component);
    bool ok = false;
    if (it != attrs.software_manifest.end()) {
      try {
        ok = compare_versions(it->second, min_version) >= 0;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      reasons.push_back(DenyReason::Version);
      break;
    }
  }
  auto rule = policy.deployment_rules.find(attrs.deployment_class);
  if (rule == policy.deployment_rules.end() || !rule->second)
    reasons.push_back(DenyReason::Deployment);
  for (const auto& flag : attrs.behavior_flags) {
    if (policy.deny_on_behavior_flags.contains(flag)) {
      reasons.push_back(DenyReason::Behavior);
      break;
    }
  }
  return reasons;
}
}  // namespace

Decision evaluate(const std::string& subject, const std::string& resource,
                  const PolicyAttributeSet& attrs, const PolicyDocument& policy, TimeMs now) {
  Decision d;
  d.reasons = failing_checks(attrs, policy);
  if (!d.reasons.empty()) return d;
  TrustSession session;
  session.subject = subject;
  session.resource = resource;
  session.granted_at = now;
  session.ttl_ms = policy.session_ttl_ms;
  session.justification = attrs;
  d.session = std::move(session);
  return d;
}

Decision reevaluate(TrustSession& session, const PolicyAttributeSet& fresh_attrs,
                    const PolicyDocument& policy, TimeMs now) {
  Decision d = evaluate(session.subject, session.resource, fresh_attrs, policy, now);
  if (!d.granted()) session.revoked = true;
  return d;
}

bool session_valid(const TrustSession& session, TimeMs now) {
  return !session.revoked && now >= session.granted_at &&
         now < session.granted_at + session.ttl_ms;
}

bool access_decision(const TrustSession& session, const std::string& resource, TimeMs now) {
  return session_valid(session, now) && session.resource == resource;
}

namespace {
TimeMs parse_ms(std::string_view v) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc{} || ptr != v.data() + v.size() || value < 0)
    throw std::invalid_argument("bad millisecond value: " + std::string(v));
  return value;
}

std::optional<tee::Feature> parse_feature(std::string_view v) {
  if (v == "memory_encryption") return tee::kMemoryEncryption;
  if (v == "register_encryption") return tee::kRegisterEncryption;
  if (v == "integrity_protection") return tee::kIntegrityProtection;
  return std::nullopt;
}
}  // namespace

PolicyDocument parse_policy(std::string_view text) {
  PolicyDocument policy;
  policy.allowlist.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("policy line " + std::to_string(lineno) + ": " + msg);
    };
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "allow_measurement") {
      std::string hex;
      if (!(ls >> hex)) fail("missing measurement");
      policy.allowlist.insert(tee::Measurement::from_hex(hex));
    } else if (key == "require_feature") {
      std::string name;
      if (!(ls >> name)) fail("missing feature name");
      auto f = parse_feature(name);
      if (!f) fail("unknown feature: " + name);
      policy.required_features |= *f;
    } else if (key == "max_attestation_age_ms") {
      std::string v;
      if (!(ls >> v)) fail("missing value");
      policy.max_attestation_age_ms = parse_ms(v);
    } else if (key == "session_ttl_ms") {
      std::string v;
      if (!(ls >> v)) fail("missing value");
      policy.session_ttl_ms = parse_ms(v);
    } else if (key == "min_version") {
      std::string component, version;
      if (!(ls >> component >> version)) fail("min_version needs component and version");
      policy.min_versions[component] = version;
    } else if (key == "deployment") {
      std::string cls, verdict;
      if (!(ls >> cls >> verdict)) fail("deployment needs class and allow|deny");
      auto dc = parse_deployment_class(cls);
      if (!dc) fail("unknown deployment class: " + cls);
      if (verdict != "allow" && verdict != "deny") fail("verdict must be allow or deny");
      policy.deployment_rules[*dc] = (verdict == "allow");
    } else if (key == "deny_behavior_flag") {
      std::string flag;
      if (!(ls >> flag)) fail("missing flag");
      policy.deny_on_behavior_flags.insert(flag);
    } else {
      fail("unknown policy key: " + key);
    }
    std::string extra;
    if (ls >> extra) fail("unexpected trailing token: " + extra);
  }
  return policy;
}

PolicyDocument load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open policy file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_policy(buf.str());
}

std::string serialize_policy(const PolicyDocument& policy) {
  std::ostringstream out;
  for (const auto& m : policy.allowlist) out << "allow_measurement " << m.hex() << "\n";
  if (policy.required_features & tee::kMemoryEncryption)
    out << "require_feature memory_encryption\n";
  if (policy.required_features & tee::kRegisterEncryption)
    out << "require_feature register_encryption\n";
  if (policy.required_features & tee::kIntegrityProtection)
    out << "require_feature integrity_protection\n";
  out << "max_attestation_age_ms " << policy.max_attestation_age_ms << "\n";
  out << "session_ttl_ms " << policy.session_ttl_ms << "\n";
  for (const auto& [c, v] : policy.min_versions) out << "min_version " << c << " " << v << "\n";
  for (const auto& [c, allow] : policy.deployment_rules)
    out << "deployment " << deployment_class_name(c) << " " << (allow ? "allow" : "deny") << "\n";
  for (const auto& f : policy.deny_on_behavior_flags) out << "deny_behavior_flag " << f << "\n";
  return out.str();
}

}  // namespace confcore::zte
