#pragma once

#include "confcore/nf/amf.hpp"
#include "confcore/nf/ausf.hpp"
#include "confcore/nf/nrf.hpp"
#include "confcore/nf/stubs.hpp"
#include "confcore/nf/udm.hpp"
#include "confcore/vnfm/orchestrator.hpp"

namespace confcore::testbed {

struct TopologyEntry {
  vnfm::NfType type;
  std::string endpoint;
};

/// Declarative deployment description consumed by the CLI and the harness.
struct Topology {
  std::vector<TopologyEntry> nfs;
  std::string policy_path;  // optional; measurement allowlist is always derived
  vnfm::Orchestrator::Bootstrap bootstrap = vnfm::Orchestrator::Bootstrap::TrustedHost;

  static Topology standard();  // NRF, UDM, AUSF, SMF, NSSF, UPF, AMF
  static Topology from_json_file(const std::string& path);
};

/// A fully deployed core: platform, orchestrator, and every NF from the
/// topology, wired over an in-process transport.
class Core {
 public:
  struct Options {
    sbi::ChannelMode mode = sbi::ChannelMode::Attested;
    std::uint64_t seed = 1;
    std::string udm_db_path;
    const Clock* clock = nullptr;  // defaults to an internal SystemClock
    zte::PolicyDocument policy;    // allowlist/required_features filled per mode
    vnfm::Orchestrator::Config orchestrator;
  };

  Core(const Topology& topology, Options options);

  sbi::Transport& transport() { return transport_; }
  const Clock& clock() const { return *clock_; }
  vnfm::Orchestrator& orchestrator() { return *orchestrator_; }
  tee::TeePlatform& platform() { return *platform_; }
  const Bytes& root_pubkey() const { return root_.public_key; }
  const zte::PolicyDocument& policy() const { return orchestrator_->policy(); }
  sbi::ChannelMode mode() const { return options_.mode; }
  const nf::CoreEnv& env() const { return env_; }

  nf::Nrf* nrf() { return nrf_.get(); }
  nf::Udm* udm() { return udm_.get(); }
  nf::Ausf* ausf() { return ausf_.get(); }
  nf::Amf* amf() { return amf_.get(); }
  nf::Smf* smf() { return smf_.get(); }
  nf::Upf* upf() { return upf_.get(); }

  std::shared_ptr<vnfm::NfInstance> instance_of(vnfm::NfType type) const;
  const std::vector<std::shared_ptr<vnfm::NfInstance>>& fleet() const {
    return orchestrator_->fleet();
  }

  /// Canonical launch identity for a topology NF; the policy allowlist is
  /// built from these.
  static Bytes nf_code_image(vnfm::NfType type);
  static tee::LaunchConfig nf_launch_config(vnfm::NfType type);
  static std::vector<std::string> nf_services(vnfm::NfType type);

  /// Per-NF provisioning secret, known to tests so host-memory sweeps can
  /// search for its plaintext.
  static std::string nf_secret(vnfm::NfType type, std::uint64_t seed);

 private:
  vnfm::NfRuntime make_runtime(const vnfm::NfSpec& spec,
                               const std::shared_ptr<tee::Svm>& svm);

  Options options_;
  SystemClock default_clock_;
  const Clock* clock_;
  sbi::Transport transport_;
  sbi::ReportStore reports_;
  crypto::SigningKeyPair root_;
  std::unique_ptr<tee::TeePlatform> platform_;
  nf::CoreEnv env_;
  std::unique_ptr<vnfm::Orchestrator> orchestrator_;
  std::map<std::string, std::shared_ptr<nf::NfBase>> nfs_;  // by endpoint
  std::map<vnfm::NfType, std::shared_ptr<vnfm::NfInstance>> instances_;

  std::shared_ptr<nf::Nrf> nrf_;
  std::shared_ptr<nf::Udm> udm_;
  std::shared_ptr<nf::Ausf> ausf_;
  std::shared_ptr<nf::Amf> amf_;
  std::shared_ptr<nf::Smf> smf_;
  std::shared_ptr<nf::Nssf> nssf_;
  std::shared_ptr<nf::Upf> upf_;
};

}  // namespace confcore::testbed
