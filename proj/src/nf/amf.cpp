#include "confcore/nf/amf.hpp"

#include <chrono>

namespace confcore::nf {

namespace {
using StageClock = std::chrono::steady_clock;

double ms_since(StageClock::time_point start) {
  return std::chrono::duration<double, std::milli>(StageClock::now() - start).count();
}
}  // namespace

Amf::Amf(CoreEnv env, std::string instance_id, std::string address,
         std::shared_ptr<tee::Svm> svm)
    : NfBase(std::move(env), std::move(instance_id), "AMF", std::move(address),
             std::move(svm)) {
  install_handlers();
}

std::string Amf::discover_one(const std::string& service) {
  {
    std::lock_guard lock(amf_mu_);
    auto it = service_cache_.find(service);
    if (it != service_cache_.end()) return it->second;
  }
  Json resp = call(env_.nrf_address, "nnrf-disc", "discover", Json{{"service", service}},
                   "nnrf-disc", "NRF");
  const auto& profiles = resp.at("profiles");
  if (profiles.empty()) throw NfError("ServiceUnavailable", "no producer for " + service);
  std::string addr = profiles[0].at("endpoint").get<std::string>();
  std::lock_guard lock(amf_mu_);
  service_cache_[service] = addr;
  return addr;
}

RegistrationResult Amf::ue_register(const Suci& suci, const UeResponder& responder,
                                    const std::string& requested_slice) {
  RegistrationResult result;

  // Stage 1: SUCI intake.
  auto t0 = StageClock::now();
  std::string suci_hex;
  try {
    suci_hex = hex_encode(suci.serialize());
  } catch (const std::exception& e) {
    result.failed_stage = "intake";
    result.error_code = "bad_suci";
    result.stage_ms[0] = ms_since(t0);
    return result;
  }
  result.stage_ms[0] = ms_since(t0);

  // Stage 2: authentication through the AUSF, with one resync retry.
  auto t1 = StageClock::now();
  Bytes kseaf;
  try {
    std::string ausf = discover_one("nausf-auth");
    for (int attempt = 0; attempt < 2; ++attempt) {
      Json init = call(ausf, "nausf-auth", "init", Json{{"suci", suci_hex}}, "nausf-auth",
                       "AUSF");
      UeChallenge challenge{hex_decode(init.at("rand").get<std::string>()),
                            hex_decode(init.at("autn").get<std::string>())};
      UeResponse ue = responder(challenge);
      if (ue.sync_failure) {
        call(ausf, "nausf-auth", "sync-failure",
             Json{{"ctx_id", init.at("ctx_id")},
                  {"ue_sqn", ue.ue_sqn},
                  {"mac", hex_encode(ue.auts_mac)}},
             "nausf-auth", "AUSF");
        if (attempt == 1) throw NfError("SyncFailure", "resync did not converge");
        continue;
      }
      Json confirm = call(ausf, "nausf-auth", "confirm",
                          Json{{"ctx_id", init.at("ctx_id")}, {"res", hex_encode(ue.res)}},
                          "nausf-auth", "AUSF");
      result.supi = confirm.at("supi").get<std::string>();
      kseaf = hex_decode(confirm.at("kseaf").get<std::string>());
      break;
    }
  } catch (const NfError& e) {
    result.failed_stage = "auth";
    result.error_code = e.code();
    result.stage_ms[1] = ms_since(t1);
    return result;
  }
  result.stage_ms[1] = ms_since(t1);

  // Stage 3: security context (anchor key + negotiated algorithms).
  auto t2 = StageClock::now();
  {
    std::lock_guard lock(amf_mu_);
    security_contexts_[result.supi] = kseaf;
  }
  if (svm_) {
    Bytes ctx = kseaf;
    std::string algs = "|nea2,nia2";
    ctx.insert(ctx.end(), algs.begin(), algs.end());
    Bytes name_digest = crypto::sha256(to_bytes(result.supi));
    svm_->put_protected("secctx/" + hex_encode(std::span(name_digest).subspan(0, 8)), ctx);
  }
  log("amf: security context stored");
  result.stage_ms[2] = ms_since(t2);

  // Stage 4: slice selection + session establishment.
  auto t3 = StageClock::now();
  try {
    std::string nssf = discover_one("nnssf-nsselection");
    Json slice = call(nssf, "nnssf-nsselection", "slice",
                      Json{{"requested", requested_slice}}, "nnssf-nsselection", "NSSF");
    result.slice = slice.at("slice").get<std::string>();
    std::string smf = discover_one("nsmf-pdusession");
    Json session = call(smf, "nsmf-pdusession", "create",
                        Json{{"supi", result.supi}, {"slice", result.slice}},
                        "nsmf-pdusession", "SMF");
    result.session_id = session.at("session_id").get<std::string>();
  } catch (const NfError& e) {
    result.failed_stage = "session";
    result.error_code = e.code();
    result.stage_ms[3] = ms_since(t3);
    return result;
  }
  result.stage_ms[3] = ms_since(t3);

  result.success = true;
  return result;
}

bool Amf::has_security_context(const std::string& supi) const {
  std::lock_guard lock(amf_mu_);
  return security_contexts_.contains(supi);
}

void Amf::install_handlers() {
  endpoint_->add_handler("namf-comm", "status", json_handler([this](const Json&) {
                           std::lock_guard lock(amf_mu_);
                           return Json{{"contexts", security_contexts_.size()}};
                         }),
                         "namf-comm");
}

}  // namespace confcore::nf
