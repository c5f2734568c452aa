#include "confcore/nf/nrf.hpp"

#include <algorithm>

namespace confcore::nf {

Json NfProfile::to_json() const {
  return Json{{"instance_id", instance_id}, {"nf_type", nf_type},
              {"services", services},       {"endpoint", endpoint},
              {"status", static_cast<int>(status)}, {"registered_at", registered_at}};
}

NfProfile NfProfile::from_json(const Json& j) {
  NfProfile p;
  p.instance_id = j.at("instance_id").get<std::string>();
  p.nf_type = j.at("nf_type").get<std::string>();
  p.services = j.at("services").get<std::vector<std::string>>();
  p.endpoint = j.at("endpoint").get<std::string>();
  p.status = static_cast<NfStatus>(j.value("status", 0));
  p.registered_at = j.value("registered_at", TimeMs{0});
  return p;
}

bool NfProfile::same_content(const NfProfile& other) const {
  return instance_id == other.instance_id && nf_type == other.nf_type &&
         services == other.services && endpoint == other.endpoint;
}

Nrf::Nrf(CoreEnv env, std::string instance_id, std::string address,
         std::shared_ptr<tee::Svm> svm, TimeMs token_ttl_ms)
    : NfBase(std::move(env), std::move(instance_id), "NRF", std::move(address), std::move(svm)),
      token_ttl_ms_(token_ttl_ms) {
  signing_kp_ = crypto::make_signing_keypair();
  if (svm_) svm_->put_protected("__nrf_signing_key", signing_kp_.secret_key);
  // Producers verify tokens against our key, including our own endpoint.
  endpoint_->set_token_key(signing_kp_.public_key);
  env_.nrf_token_pubkey = signing_kp_.public_key;

  // The registry knows about itself from the start, so token issuance for
  // NRF-scoped services has a registered producer to check against.
  NfProfile self;
  self.instance_id = instance_id_;
  self.nf_type = "NRF";
  self.services = {"nnrf-nfm", "nnrf-disc", "nnrf-token"};
  self.endpoint = address_;
  self.registered_at = env_.clock->now_ms();
  registry_[self.instance_id] = self;

  install_handlers();
}

void Nrf::register_profile(const NfProfile& profile) {
  std::lock_guard lock(registry_mu_);
  auto it = registry_.find(profile.instance_id);
  if (it != registry_.end() && it->second.status == NfStatus::Registered &&
      !it->second.same_content(profile))
    throw NfError("DuplicateInstanceConflict",
                  "instance " + profile.instance_id + " registered with different content");
  NfProfile stored = profile;
  stored.status = NfStatus::Registered;
  if (it == registry_.end() || it->second.status != NfStatus::Registered)
    stored.registered_at = env_.clock->now_ms();
  else
    stored.registered_at = it->second.registered_at;  // idempotent re-registration
  registry_[profile.instance_id] = std::move(stored);
}

void Nrf::deregister(const std::string& instance_id) {
  std::lock_guard lock(registry_mu_);
  auto it = registry_.find(instance_id);
  if (it != registry_.end()) it->second.status = NfStatus::Deregistered;
}

std::vector<NfProfile> Nrf::discover(const std::string& service) const {
  std::lock_guard lock(registry_mu_);
  std::vector<NfProfile> out;
  for (const auto& [id, p] : registry_) {
    if (p.status != NfStatus::Registered) continue;
    if (std::find(p.services.begin(), p.services.end(), service) != p.services.end())
      out.push_back(p);
  }
  return out;
}

std::optional<NfProfile> Nrf::lookup(const std::string& instance_id) const {
  std::lock_guard lock(registry_mu_);
  auto it = registry_.find(instance_id);
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

std::size_t Nrf::registered_count() const {
  std::lock_guard lock(registry_mu_);
  std::size_t n = 0;
  for (const auto& [id, p] : registry_)
    if (p.status == NfStatus::Registered) ++n;
  return n;
}

bool Nrf::scope_offered(const std::string& audience,
                        const std::vector<std::string>& scope) const {
  std::lock_guard lock(registry_mu_);
  for (const auto& service : scope) {
    bool offered = false;
    for (const auto& [id, p] : registry_) {
      if (p.status != NfStatus::Registered || p.nf_type != audience) continue;
      if (std::find(p.services.begin(), p.services.end(), service) != p.services.end()) {
        offered = true;
        break;
      }
    }
    if (!offered) return false;
  }
  return true;
}

sbi::AccessToken Nrf::issue_token(const std::string& requester, const std::string& audience,
                                  const std::vector<std::string>& scope, bool bootstrap_ok) {
  if (!bootstrap_ok) {
    auto profile = lookup(requester);
    if (!profile || profile->status != NfStatus::Registered)
      throw NfError("UnknownRequester", "requester " + requester + " is not registered");
  }
  if (!scope_offered(audience, scope))
    throw NfError("ScopeNotOffered", "no registered " + audience + " offers the requested scope");
  TimeMs now = env_.clock->now_ms();
  return sbi::issue_token(requester, audience, scope, now, now + token_ttl_ms_,
                          signing_kp_.secret_key);
}

void Nrf::install_handlers() {
  endpoint_->add_handler(
      "nnrf-nfm", "register", json_handler([this](const Json& in) {
        NfProfile profile = NfProfile::from_json(in.at("profile"));
        register_profile(profile);
        log("nrf: registered " + profile.instance_id);
        return Json{{"status", "registered"}};
      }),
      "nnrf-nfm");

  endpoint_->add_handler(
      "nnrf-nfm", "deregister", json_handler([this](const Json& in) {
        std::string id = in.at("instance_id").get<std::string>();
        deregister(id);
        log("nrf: deregistered " + id);
        return Json{{"status", "deregistered"}};
      }),
      "nnrf-nfm");

  endpoint_->add_handler(
      "nnrf-disc", "discover", json_handler([this](const Json& in) {
        auto profiles = discover(in.at("service").get<std::string>());
        Json out = Json::array();
        for (const auto& p : profiles) out.push_back(p.to_json());
        return Json{{"profiles", out}};
      }),
      "nnrf-disc");

  // Token acquisition is unprotected at the token layer; in attested mode the
  // channel itself is the guard.
  endpoint_->add_handler("nnrf-token", "token", json_handler([this](const Json& in) {
    std::string requester = in.at("requester").get<std::string>();
    bool bootstrap_ok = false;
    if (in.contains("bootstrap_mac") && !env_.vnfm_bootstrap_secret.empty()) {
      Bytes expected = crypto::hmac_sha256(env_.vnfm_bootstrap_secret, to_bytes(requester));
      bootstrap_ok = hex_decode(in["bootstrap_mac"].get<std::string>()) == expected;
    }
    sbi::AccessToken tok =
        issue_token(requester, in.at("audience").get<std::string>(),
                    in.at("scope").get<std::vector<std::string>>(), bootstrap_ok);
    return Json{{"token", hex_encode(tok.serialize())}};
  }));
}

}  // namespace confcore::nf
