#pragma once

#include <functional>
#include <memory>
#include <set>
#include <vector>

#include "confcore/sbi/channel.hpp"
#include "confcore/tee/tee.hpp"
#include "confcore/zte/policy.hpp"

namespace confcore::vnfm {

enum class NfType { AMF, SMF, AUSF, UDM, NRF, NSSF, UPF };

const char* nf_type_name(NfType t);
std::optional<NfType> parse_nf_type(std::string_view s);

struct NfSpec {
  NfType nf_type = NfType::AMF;
  std::string instance_id;
  Bytes code_image;
  tee::LaunchConfig launch_config;
  tee::FeatureSet required_features = 0;
  Bytes provisioning_payload;
  std::string endpoint;
};

enum class LifecycleState { Deploying, Operating, Reattesting, Terminating, Terminated };

const char* lifecycle_state_name(LifecycleState s);

// Deployment checkpoints, in flow order.
enum class DeployStep {
  Launch,
  Attest,      // nonce challenge + report generation
  Verify,
  Evaluate,
  Channel,     // report-keyed secure channel to the SVM
  Provision,
  Start,
  Register,
};
inline constexpr int kDeployStepCount = 8;

const char* deploy_step_name(DeployStep s);

struct LifecycleEvent {
  TimeMs at = 0;
  std::string kind;
  std::string detail;
};

/// Reconstructs the lifecycle state by folding over the event log.
LifecycleState replay_state(const std::vector<LifecycleEvent>& events);

/// Hooks the orchestrator uses to start/stop the NF process and manage its
/// NRF registration; supplied by whoever wires the core together.
struct NfRuntime {
  std::function<void()> register_nrf;
  std::function<void()> deregister_nrf;
  std::function<void()> stop;
};

struct NfInstance {
  std::string instance_id;
  NfSpec spec;
  std::shared_ptr<tee::Svm> svm;
  zte::TrustSession session;
  std::string endpoint;
  LifecycleState lifecycle_state = LifecycleState::Deploying;
  std::vector<LifecycleEvent> event_log;
  NfRuntime runtime;
  TimeMs last_attested_ms = 0;
  int transport_strikes = 0;
  std::set<std::string> behavior_flags;
  std::mutex op_mu;  // serializes lifecycle operations on this instance
};

enum class DeployFailure {
  LaunchFailure,
  AttestationRejected,
  PolicyDenied,
  ChannelFailure,
  ProvisioningFailure,
  StartFailure,
  RegistrationFailure,
};

class DeployError : public std::runtime_error {
 public:
  DeployError(DeployFailure failure, DeployStep step, const std::string& what)
      : std::runtime_error(what), failure_(failure), step_(step) {}
  DeployFailure failure() const { return failure_; }
  DeployStep step() const { return step_; }

 private:
  DeployFailure failure_;
  DeployStep step_;
};

class LifecycleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the transport-fault injector during re-attestation.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NfFactory =
    std::function<NfRuntime(const NfSpec&, const std::shared_ptr<tee::Svm>&)>;

enum class ReattestOutcome { Renewed, RevokedAndQuarantined, Deferred };

/// VNF manager: attestation-gated deployment, periodic re-attestation, and
/// termination with log retrieval.
class Orchestrator {
 public:
  enum class Bootstrap { TrustedHost, SelfAttested };

  struct Config {
    Bootstrap bootstrap = Bootstrap::TrustedHost;
    bool attestation_enabled = true;  // false = baseline (standard VM) flow
    TimeMs reattest_period_ms = 60'000;
    int transport_strike_limit = 3;
    zte::DeploymentClass deployment_class = zte::DeploymentClass::PrivateCloud;
  };

  Orchestrator(tee::TeePlatform& platform, Bytes root_pubkey, zte::PolicyDocument policy,
               const Clock& clock, sbi::ReportStore& reports, NfFactory factory,
               Config config);

  /// Runs the full deployment flow; throws DeployError on any failing step
  /// after terminating the SVM. The provisioning payload is never sent to an
  /// SVM that lacks a verified report and a policy grant.
  std::shared_ptr<NfInstance> deploy_nf(const NfSpec& spec);

  ReattestOutcome reattest(const std::shared_ptr<NfInstance>& inst);

  /// NRF deregistration precedes SVM termination; returns the exported log.
  Bytes terminate_nf(const std::shared_ptr<NfInstance>& inst);

  /// Re-attestation scheduler; drive it from the (possibly simulated) clock.
  void tick();

  void set_policy(zte::PolicyDocument policy) { policy_ = std::move(policy); }
  const zte::PolicyDocument& policy() const { return policy_; }
  void report_behavior_flag(const std::shared_ptr<NfInstance>& inst, const std::string& flag);

  const std::vector<std::shared_ptr<NfInstance>>& fleet() const { return fleet_; }
  std::shared_ptr<NfInstance> find(const std::string& instance_id) const;

  // Test hooks.
  void set_fault_injector(std::function<bool(DeployStep)> injector) {
    fault_injector_ = std::move(injector);
  }
  void set_transport_fault(std::function<bool(const std::string&)> injector) {
    transport_fault_ = std::move(injector);
  }

  bool self_attested() const { return self_attested_; }
  std::uint64_t reattest_count() const { return reattest_count_; }

 private:
  void bootstrap();
  void append_event(NfInstance& inst, std::string kind, std::string detail = {});
  void inject(DeployStep step, DeployFailure failure, const std::string& what);
  zte::PolicyAttributeSet attributes_from(const tee::AttestationReport& report,
                                          const NfInstance* inst) const;
  void quarantine_locked(NfInstance& inst, const std::string& reason);

  tee::TeePlatform& platform_;
  tee::ReportVerifier verifier_;
  Bytes root_pubkey_;
  zte::PolicyDocument policy_;
  const Clock& clock_;
  sbi::ReportStore& reports_;
  NfFactory factory_;
  Config config_;
  std::vector<std::shared_ptr<NfInstance>> fleet_;
  std::function<bool(DeployStep)> fault_injector_;
  std::function<bool(const std::string&)> transport_fault_;
  bool self_attested_ = false;
  std::uint64_t reattest_count_ = 0;
  std::uint64_t next_instance_ = 1;
  mutable std::mutex fleet_mu_;
};

}  // namespace confcore::vnfm
