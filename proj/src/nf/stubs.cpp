#include "confcore/nf/stubs.hpp"

namespace confcore::nf {

Smf::Smf(CoreEnv env, std::string instance_id, std::string address,
         std::shared_ptr<tee::Svm> svm)
    : NfBase(std::move(env), std::move(instance_id), "SMF", std::move(address),
             std::move(svm)) {
  endpoint_->add_handler(
      "nsmf-pdusession", "create", json_handler([this](const Json& in) {
        std::string session_id;
        {
          std::lock_guard lock(smf_mu_);
          session_id = "sess-" + std::to_string(next_session_++);
          sessions_.insert(session_id);
        }
        Json out{{"session_id", session_id}};
        if (in.contains("qos")) out["qos"] = in["qos"];  // echo QoS config
        if (in.contains("slice")) out["slice"] = in["slice"];
        return out;
      }),
      "nsmf-pdusession");
}

bool Smf::has_session(const std::string& session_id) const {
  std::lock_guard lock(smf_mu_);
  return sessions_.contains(session_id);
}

Nssf::Nssf(CoreEnv env, std::string instance_id, std::string address,
           std::shared_ptr<tee::Svm> svm)
    : NfBase(std::move(env), std::move(instance_id), "NSSF", std::move(address),
             std::move(svm)) {
  endpoint_->add_handler(
      "nnssf-nsselection", "slice", json_handler([](const Json& in) {
        std::string requested = in.value("requested", "");
        return Json{{"slice", requested.empty() ? "default" : requested}};
      }),
      "nnssf-nsselection");
}

Upf::Upf(CoreEnv env, std::string instance_id, std::string address,
         std::shared_ptr<tee::Svm> svm)
    : NfBase(std::move(env), std::move(instance_id), "UPF", std::move(address),
             std::move(svm)) {
  endpoint_->add_handler(
      "nupf-data", "forward", json_handler([this](const Json& in) {
        std::string payload = in.at("payload").get<std::string>();
        {
          std::lock_guard lock(upf_mu_);
          bytes_forwarded_ += payload.size() / 2;  // hex-encoded
        }
        return Json{{"payload", payload}};
      }));
  // No token scope: the user plane carries UE traffic, and UEs hold no NRF
  // credentials. Admission is the session check at the RAN side.
}

std::uint64_t Upf::bytes_forwarded() const {
  std::lock_guard lock(upf_mu_);
  return bytes_forwarded_;
}

}  // namespace confcore::nf
