#pragma once

#include "confcore/nf/base.hpp"
#include "confcore/nf/suci.hpp"

namespace confcore::nf {

/// Authentication server: de-conceals via the UDM, challenges the UE through
/// the AMF, confirms the response, and derives the anchor key for the SEAF.
class Ausf : public NfBase {
 public:
  Ausf(CoreEnv env, std::string instance_id, std::string address,
       std::shared_ptr<tee::Svm> svm = nullptr,
       std::string serving_network = "5G:mnc001.mcc001");

 private:
  struct AuthCtx {
    std::string supi;
    Bytes rand;
    Bytes xres_star;
    Bytes kausf;
  };

  void install_handlers();
  std::string udm_address();

  std::string serving_network_;
  std::map<std::string, AuthCtx> contexts_;
  std::uint64_t next_ctx_ = 1;
  std::string udm_address_cache_;
  std::mutex ausf_mu_;
};

}  // namespace confcore::nf
