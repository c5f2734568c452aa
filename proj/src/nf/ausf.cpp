#include "confcore/nf/ausf.hpp"

#include "confcore/nf/aka.hpp"

namespace confcore::nf {

Ausf::Ausf(CoreEnv env, std::string instance_id, std::string address,
           std::shared_ptr<tee::Svm> svm, std::string serving_network)
    : NfBase(std::move(env), std::move(instance_id), "AUSF", std::move(address),
             std::move(svm)),
      serving_network_(std::move(serving_network)) {
  install_handlers();
}

std::string Ausf::udm_address() {
  {
    std::lock_guard lock(ausf_mu_);
    if (!udm_address_cache_.empty()) return udm_address_cache_;
  }
  Json resp = call(env_.nrf_address, "nnrf-disc", "discover", Json{{"service", "nudm-ueau"}},
                   "nnrf-disc", "NRF");
  const auto& profiles = resp.at("profiles");
  if (profiles.empty()) throw NfError("UdmUnavailable", "no registered UDM offers nudm-ueau");
  std::string addr = profiles[0].at("endpoint").get<std::string>();
  std::lock_guard lock(ausf_mu_);
  udm_address_cache_ = addr;
  return addr;
}

void Ausf::install_handlers() {
  endpoint_->add_handler(
      "nausf-auth", "init", json_handler([this](const Json& in) {
        Json vec = call(udm_address(), "nudm-ueau", "generate-vector",
                        Json{{"suci", in.at("suci").get<std::string>()}}, "nudm-ueau", "UDM");
        AuthCtx ctx;
        ctx.supi = vec.at("supi").get<std::string>();
        ctx.rand = hex_decode(vec.at("rand").get<std::string>());
        ctx.xres_star = hex_decode(vec.at("xres_star").get<std::string>());
        ctx.kausf = hex_decode(vec.at("kausf").get<std::string>());
        std::string ctx_id;
        {
          std::lock_guard lock(ausf_mu_);
          ctx_id = "authctx-" + std::to_string(next_ctx_++);
          contexts_[ctx_id] = ctx;
        }
        log("ausf: challenge issued");
        return Json{{"ctx_id", ctx_id},
                    {"rand", hex_encode(ctx.rand)},
                    {"autn", vec.at("autn")}};
      }),
      "nausf-auth");

  endpoint_->add_handler(
      "nausf-auth", "confirm", json_handler([this](const Json& in) {
        std::string ctx_id = in.at("ctx_id").get<std::string>();
        AuthCtx ctx;
        {
          std::lock_guard lock(ausf_mu_);
          auto it = contexts_.find(ctx_id);
          if (it == contexts_.end()) throw NfError("UnknownContext", "no auth context");
          ctx = it->second;
          contexts_.erase(it);
        }
        Bytes res = hex_decode(in.at("res").get<std::string>());
        bool success = (res == ctx.xres_star);
        call(udm_address(), "nudm-ueau", "confirm-auth",
             Json{{"supi", ctx.supi}, {"success", success}}, "nudm-ueau", "UDM");
        if (!success) throw NfError("ResponseMismatch", "challenge response mismatch");
        Bytes kseaf = aka::derive_kseaf(ctx.kausf, serving_network_);
        log("ausf: authentication success");
        return Json{{"supi", ctx.supi}, {"kseaf", hex_encode(kseaf)}};
      }),
      "nausf-auth");

  endpoint_->add_handler(
      "nausf-auth", "sync-failure", json_handler([this](const Json& in) {
        std::string ctx_id = in.at("ctx_id").get<std::string>();
        AuthCtx ctx;
        {
          std::lock_guard lock(ausf_mu_);
          auto it = contexts_.find(ctx_id);
          if (it == contexts_.end()) throw NfError("UnknownContext", "no auth context");
          ctx = it->second;
          contexts_.erase(it);
        }
        call(udm_address(), "nudm-ueau", "resync",
             Json{{"supi", ctx.supi},
                  {"ue_sqn", in.at("ue_sqn").get<std::uint64_t>()},
                  {"mac", in.at("mac").get<std::string>()},
                  {"rand", hex_encode(ctx.rand)}},
             "nudm-ueau", "UDM");
        log("ausf: sqn resynchronized");
        return Json{{"status", "resynced"}};
      }),
      "nausf-auth");
}

}  // namespace confcore::nf
