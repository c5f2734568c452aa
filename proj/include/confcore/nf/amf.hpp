#pragma once

#include <array>

#include "confcore/nf/base.hpp"
#include "confcore/nf/suci.hpp"

namespace confcore::nf {

struct UeChallenge {
  Bytes rand;
  Bytes autn;
};

struct UeResponse {
  bool sync_failure = false;
  Bytes res;             // when !sync_failure
  std::uint64_t ue_sqn = 0;  // resync payload
  Bytes auts_mac;
};

using UeResponder = std::function<UeResponse(const UeChallenge&)>;

struct RegistrationResult {
  bool success = false;
  std::string failed_stage;  // "intake" | "auth" | "security" | "session"
  std::string error_code;
  std::array<double, 4> stage_ms{};  // intake, auth, security context, session
  std::string supi;
  std::string session_id;
  std::string slice;
};

/// Entry point for UE registration and security anchor: runs SUCI intake,
/// authentication via the AUSF, security-context establishment, and session
/// setup through NSSF/SMF.
class Amf : public NfBase {
 public:
  Amf(CoreEnv env, std::string instance_id, std::string address,
      std::shared_ptr<tee::Svm> svm = nullptr);

  RegistrationResult ue_register(const Suci& suci, const UeResponder& responder,
                                 const std::string& requested_slice = {});

  bool has_security_context(const std::string& supi) const;

 private:
  void install_handlers();
  std::string discover_one(const std::string& service);

  std::map<std::string, Bytes> security_contexts_;  // supi -> anchor key
  std::map<std::string, std::string> service_cache_;
  mutable std::mutex amf_mu_;
};

}  // namespace confcore::nf
