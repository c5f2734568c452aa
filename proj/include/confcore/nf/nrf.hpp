#pragma once

#include "confcore/nf/base.hpp"

namespace confcore::nf {

enum class NfStatus { Registered, Suspended, Deregistered };

struct NfProfile {
  std::string instance_id;
  std::string nf_type;
  std::vector<std::string> services;
  std::string endpoint;
  NfStatus status = NfStatus::Registered;
  TimeMs registered_at = 0;

  Json to_json() const;
  static NfProfile from_json(const Json& j);
  bool same_content(const NfProfile& other) const;  // ignores status/registered_at
};

/// Registry of NFs and their services, and the OAuth2 authorizer issuing
/// self-contained access tokens.
class Nrf : public NfBase {
 public:
  Nrf(CoreEnv env, std::string instance_id, std::string address,
      std::shared_ptr<tee::Svm> svm = nullptr, TimeMs token_ttl_ms = 300'000);

  const Bytes& token_pubkey() const { return signing_kp_.public_key; }

  // Local registry API (the SBI handlers call into these).
  void register_profile(const NfProfile& profile);  // idempotent on identical content
  void deregister(const std::string& instance_id);
  std::vector<NfProfile> discover(const std::string& service) const;
  std::optional<NfProfile> lookup(const std::string& instance_id) const;
  sbi::AccessToken issue_token(const std::string& requester, const std::string& audience,
                               const std::vector<std::string>& scope, bool bootstrap_ok);

  std::size_t registered_count() const;

 private:
  void install_handlers();
  bool scope_offered(const std::string& audience, const std::vector<std::string>& scope) const;

  crypto::SigningKeyPair signing_kp_;
  TimeMs token_ttl_ms_;
  std::map<std::string, NfProfile> registry_;
  mutable std::mutex registry_mu_;
};

}  // namespace confcore::nf
