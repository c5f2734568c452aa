#include "confcore/nf/base.hpp"

namespace confcore::nf {

Json error_body(const std::string& code, const std::string& message) {
  return Json{{"error", code}, {"message", message}};
}

Bytes json_to_bytes(const Json& j) {
  std::string s = j.dump();
  return to_bytes(s);
}

Json json_from_bytes(std::span<const std::uint8_t> b) {
  return Json::parse(std::string(b.begin(), b.end()));
}

sbi::RequestHandler json_handler(std::function<Json(const Json&)> fn) {
  return [fn = std::move(fn)](const sbi::SbiMessage& req) {
    sbi::SbiMessage resp;
    resp.service = req.service;
    resp.path = req.path;
    Json body;
    try {
      Json in = req.body.empty() ? Json::object() : json_from_bytes(req.body);
      body = fn(in);
    } catch (const NfError& e) {
      body = error_body(e.code(), e.what());
    } catch (const Json::exception& e) {
      body = error_body("bad_request", e.what());
    }
    resp.body = json_to_bytes(body);
    return resp;
  };
}

NfBase::NfBase(CoreEnv env, std::string instance_id, std::string nf_type, std::string address,
               std::shared_ptr<tee::Svm> svm)
    : env_(std::move(env)),
      instance_id_(std::move(instance_id)),
      nf_type_(std::move(nf_type)),
      address_(std::move(address)),
      svm_(std::move(svm)) {
  endpoint_ = std::make_shared<sbi::ServerEndpoint>(instance_id_, nf_type_, env_.clock);
  endpoint_->set_token_key(env_.nrf_token_pubkey);
  if (svm_) {
    // The channel private key lives in the SVM's protected store; the report
    // published the matching public half.
    auto svm = svm_;
    endpoint_->set_channel_secret_provider([svm]() { return svm->channel_secret(); });
  } else {
    endpoint_->set_channel_keypair(crypto::make_exchange_keypair());
  }
}

NfBase::~NfBase() {
  if (env_.transport) env_.transport->unbind(address_);
}

void NfBase::bind() { env_.transport->bind(address_, endpoint_); }

void NfBase::unbind() { env_.transport->unbind(address_); }

void NfBase::log(std::string_view line) {
  if (svm_) svm_->append_log(line);
}

sbi::Channel& NfBase::channel_to(const std::string& address) {
  std::lock_guard lock(mu_);
  auto it = channels_.find(address);
  if (it != channels_.end()) return it->second;
  sbi::ChannelIdentity local{instance_id_, {}, env_.mode == sbi::ChannelMode::Attested};
  sbi::Channel ch = sbi::open_channel(local, *env_.transport, address, env_.mode,
                                      *env_.reports, *env_.clock);
  return channels_.emplace(address, std::move(ch)).first->second;
}

sbi::AccessToken NfBase::fetch_token(const std::string& audience,
                                     const std::vector<std::string>& scope) {
  Json body{{"requester", instance_id_}, {"audience", audience}, {"scope", scope}};
  if (!env_.vnfm_bootstrap_secret.empty()) {
    Bytes mac = crypto::hmac_sha256(env_.vnfm_bootstrap_secret, to_bytes(instance_id_));
    body["bootstrap_mac"] = hex_encode(mac);
  }
  Json resp = call(env_.nrf_address, "nnrf-token", "token", body);
  return sbi::AccessToken::parse(hex_decode(resp.at("token").get<std::string>()));
}

Json NfBase::call(const std::string& address, const std::string& service,
                  const std::string& path, const Json& body, const std::string& scope,
                  const std::string& audience) {
  sbi::SbiMessage msg;
  msg.method = sbi::Method::Post;
  msg.service = service;
  msg.path = path;
  msg.body = json_to_bytes(body);
  if (!scope.empty()) {
    std::string cache_key = audience + "\n" + scope;
    TimeMs now = env_.clock->now_ms();
    Bytes token;
    {
      std::lock_guard lock(mu_);
      auto it = token_cache_.find(cache_key);
      if (it != token_cache_.end() && now < it->second.expires_at)
        token = it->second.serialize();
    }
    if (token.empty()) {
      sbi::AccessToken fresh = fetch_token(audience, {scope});
      token = fresh.serialize();
      std::lock_guard lock(mu_);
      token_cache_[cache_key] = std::move(fresh);
    }
    msg.token = token;
  }
  sbi::Channel& ch = channel_to(address);
  sbi::SbiMessage resp = ch.send_request(std::move(msg));
  Json out = resp.body.empty() ? Json::object() : json_from_bytes(resp.body);
  if (out.is_object() && out.contains("error"))
    throw NfError(out["error"].get<std::string>(), out.value("message", ""));
  return out;
}

}  // namespace confcore::nf
