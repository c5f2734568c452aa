#include "confcore/vnfm/orchestrator.hpp"

#include <algorithm>

namespace confcore::vnfm {

const char* nf_type_name(NfType t) {
  switch (t) {
    case NfType::AMF: return "AMF";
    case NfType::SMF: return "SMF";
    case NfType::AUSF: return "AUSF";
    case NfType::UDM: return "UDM";
    case NfType::NRF: return "NRF";
    case NfType::NSSF: return "NSSF";
    case NfType::UPF: return "UPF";
  }
  return "?";
}

std::optional<NfType> parse_nf_type(std::string_view s) {
  if (s == "AMF") return NfType::AMF;
  if (s == "SMF") return NfType::SMF;
  if (s == "AUSF") return NfType::AUSF;
  if (s == "UDM") return NfType::UDM;
  if (s == "NRF") return NfType::NRF;
  if (s == "NSSF") return NfType::NSSF;
  if (s == "UPF") return NfType::UPF;
  return std::nullopt;
}

const char* lifecycle_state_name(LifecycleState s) {
  switch (s) {
    case LifecycleState::Deploying: return "Deploying";
    case LifecycleState::Operating: return "Operating";
    case LifecycleState::Reattesting: return "Reattesting";
    case LifecycleState::Terminating: return "Terminating";
    case LifecycleState::Terminated: return "Terminated";
  }
  return "?";
}

const char* deploy_step_name(DeployStep s) {
  switch (s) {
    case DeployStep::Launch: return "launch";
    case DeployStep::Attest: return "attest";
    case DeployStep::Verify: return "verify";
    case DeployStep::Evaluate: return "evaluate";
    case DeployStep::Channel: return "channel";
    case DeployStep::Provision: return "provision";
    case DeployStep::Start: return "start";
    case DeployStep::Register: return "register";
  }
  return "?";
}

LifecycleState replay_state(const std::vector<LifecycleEvent>& events) {
  LifecycleState state = LifecycleState::Deploying;
  for (const auto& e : events) {
    if (e.kind == "deploy:begin") state = LifecycleState::Deploying;
    else if (e.kind == "operating") state = LifecycleState::Operating;
    else if (e.kind == "reattest:begin") state = LifecycleState::Reattesting;
    else if (e.kind == "reattest:renewed") state = LifecycleState::Operating;
    else if (e.kind == "reattest:deferred") state = LifecycleState::Operating;
    else if (e.kind == "reattest:revoked") state = LifecycleState::Terminating;
    else if (e.kind == "terminating") state = LifecycleState::Terminating;
    else if (e.kind == "terminated") state = LifecycleState::Terminated;
    else if (e.kind == "deploy:aborted") state = LifecycleState::Terminated;
  }
  return state;
}

Orchestrator::Orchestrator(tee::TeePlatform& platform, Bytes root_pubkey,
                           zte::PolicyDocument policy, const Clock& clock,
                           sbi::ReportStore& reports, NfFactory factory, Config config)
    : platform_(platform),
      verifier_(root_pubkey),
      root_pubkey_(std::move(root_pubkey)),
      policy_(std::move(policy)),
      clock_(clock),
      reports_(reports),
      factory_(std::move(factory)),
      config_(config) {
  bootstrap();
}

void Orchestrator::bootstrap() {
  if (config_.bootstrap == Bootstrap::TrustedHost) {
    // Pinned on-premises deployment: the chain of trust starts here.
    self_attested_ = false;
    return;
  }
  // Decentralized option: the VNFM runs in its own SVM and proves itself to an
  // operator-held verifier before orchestrating anything.
  Bytes image = to_bytes("vnfm-image");
  tee::LaunchConfig cfg{{"role", "vnfm"}};
  auto svm = platform_.launch_svm(image, cfg, platform_.supported_features());
  tee::Nonce nonce{};
  Bytes nb = crypto::random_bytes(nonce.size());
  std::copy(nb.begin(), nb.end(), nonce.begin());
  auto report = svm->generate_report(nonce);
  auto result = tee::verify_report_once(report, root_pubkey_, nonce,
                                        {tee::measure(image, cfg)},
                                        platform_.supported_features());
  if (!result.verified)
    throw LifecycleError("vnfm self-attestation failed: " +
                         std::string(tee::verify_reject_name(result.reason)));
  svm->mark_attested();
  self_attested_ = true;
}

void Orchestrator::append_event(NfInstance& inst, std::string kind, std::string detail) {
  inst.event_log.push_back(LifecycleEvent{clock_.now_ms(), std::move(kind), std::move(detail)});
}

void Orchestrator::inject(DeployStep step, DeployFailure failure, const std::string& what) {
  if (fault_injector_ && fault_injector_(step)) throw DeployError(failure, step, what);
}

zte::PolicyAttributeSet Orchestrator::attributes_from(const tee::AttestationReport& report,
                                                      const NfInstance* inst) const {
  zte::PolicyAttributeSet attrs;
  attrs.measurement = report.measurement;
  attrs.attestation_age_ms = 0;  // evaluated against a report verified just now
  attrs.platform_features = report.platform_info.features;
  attrs.deployment_class = config_.deployment_class;
  if (inst) {
    attrs.behavior_flags = inst->behavior_flags;
    for (const auto& [k, v] : inst->spec.launch_config)
      if (k.starts_with("version.")) attrs.software_manifest[k.substr(8)] = v;
  }
  return attrs;
}

std::shared_ptr<NfInstance> Orchestrator::deploy_nf(const NfSpec& spec) {
  auto inst = std::make_shared<NfInstance>();
  {
    std::lock_guard lock(fleet_mu_);
    inst->instance_id = spec.instance_id.empty()
                            ? std::string(nf_type_name(spec.nf_type)) + "-" +
                                  std::to_string(next_instance_++)
                            : spec.instance_id;
  }
  inst->spec = spec;
  inst->spec.instance_id = inst->instance_id;
  inst->endpoint = spec.endpoint;
  append_event(*inst, "deploy:begin", inst->instance_id);

  auto abort_deploy = [&](const DeployError& err) -> void {
    // Abort rule: tear the SVM down, drop any verified-key entry, never leave
    // a partially deployed NF reachable.
    if (inst->runtime.stop) inst->runtime.stop();
    if (inst->runtime.deregister_nrf) {
      try {
        inst->runtime.deregister_nrf();
      } catch (const std::exception&) {
      }
    }
    reports_.erase(inst->endpoint);
    if (inst->svm && inst->svm->state() != tee::SvmState::Terminated) inst->svm->terminate();
    append_event(*inst, "deploy:aborted",
                 std::string(deploy_step_name(err.step())) + ": " + err.what());
    inst->lifecycle_state = LifecycleState::Terminated;
    std::lock_guard lock(fleet_mu_);
    fleet_.push_back(inst);
  };

  try {
    inject(DeployStep::Launch, DeployFailure::LaunchFailure, "injected launch fault");
    inst->svm = platform_.launch_svm(spec.code_image, spec.launch_config,
                                     spec.required_features);
    append_event(*inst, "deploy:launched", inst->svm->id());

    if (config_.attestation_enabled) {
      inject(DeployStep::Attest, DeployFailure::AttestationRejected, "injected attest fault");
      tee::Nonce nonce{};
      Bytes nb = crypto::random_bytes(nonce.size());
      std::copy(nb.begin(), nb.end(), nonce.begin());
      auto report = inst->svm->generate_report(nonce);
      append_event(*inst, "deploy:attested");

      inject(DeployStep::Verify, DeployFailure::AttestationRejected, "injected verify fault");
      auto verdict =
          verifier_.verify(report, nonce, policy_.allowlist, policy_.required_features);
      if (!verdict.verified)
        throw DeployError(DeployFailure::AttestationRejected, DeployStep::Verify,
                          std::string("report rejected: ") +
                              tee::verify_reject_name(verdict.reason));
      append_event(*inst, "deploy:verified");

      inject(DeployStep::Evaluate, DeployFailure::PolicyDenied, "injected policy fault");
      auto attrs = attributes_from(report, inst.get());
      auto decision = zte::evaluate(inst->instance_id, "nf-execute:" + inst->instance_id,
                                    attrs, policy_, clock_.now_ms());
      if (!decision.granted()) {
        std::string reasons;
        for (auto r : decision.reasons)
          reasons += std::string(reasons.empty() ? "" : ",") + zte::deny_reason_name(r);
        throw DeployError(DeployFailure::PolicyDenied, DeployStep::Evaluate,
                          "policy denied: " + reasons);
      }
      inst->session = *decision.session;
      append_event(*inst, "deploy:granted");
      inst->svm->mark_attested();

      inject(DeployStep::Channel, DeployFailure::ChannelFailure, "injected channel fault");
      auto eph = crypto::make_exchange_keypair();
      Bytes shared = crypto::shared_secret(eph.secret_key, report.channel_pubkey);
      Bytes expected_confirm =
          crypto::derive_key(shared, "vnfm-confirm", eph.public_key);
      if (inst->svm->channel_confirm(eph.public_key) != expected_confirm)
        throw DeployError(DeployFailure::ChannelFailure, DeployStep::Channel,
                          "secure channel key confirmation failed");
      append_event(*inst, "deploy:channel");

      inject(DeployStep::Provision, DeployFailure::ProvisioningFailure,
             "injected provision fault");
      Bytes seal_key = crypto::derive_key(shared, "vnfm-provision", eph.public_key);
      inst->svm->provision_secure(eph.public_key,
                                  crypto::aead_seal(seal_key, 0, spec.provisioning_payload));
      append_event(*inst, "deploy:provisioned");

      reports_.put(inst->endpoint,
                   sbi::ReportStore::Entry{inst->instance_id, report.channel_pubkey});
      inst->last_attested_ms = clock_.now_ms();
    } else {
      // Baseline flow for standard VMs: template provisioning, no gating.
      inject(DeployStep::Provision, DeployFailure::ProvisioningFailure,
             "injected provision fault");
      inst->svm->provision_plaintext(spec.provisioning_payload);
      append_event(*inst, "deploy:provisioned");
      inst->session = zte::TrustSession{};  // no grant in baseline mode
    }

    inject(DeployStep::Start, DeployFailure::StartFailure, "injected start fault");
    inst->runtime = factory_(inst->spec, inst->svm);
    inst->svm->mark_running();
    append_event(*inst, "deploy:started");

    inject(DeployStep::Register, DeployFailure::RegistrationFailure,
           "injected registration fault");
    try {
      if (inst->runtime.register_nrf) inst->runtime.register_nrf();
    } catch (const std::exception& e) {
      throw DeployError(DeployFailure::RegistrationFailure, DeployStep::Register, e.what());
    }
    append_event(*inst, "deploy:registered");
  } catch (const DeployError& err) {
    abort_deploy(err);
    throw;
  } catch (const tee::TeeError& e) {
    DeployError err(DeployFailure::ProvisioningFailure, DeployStep::Provision, e.what());
    abort_deploy(err);
    throw err;
  }

  inst->lifecycle_state = LifecycleState::Operating;
  append_event(*inst, "operating");
  std::lock_guard lock(fleet_mu_);
  fleet_.push_back(inst);
  return inst;
}

void Orchestrator::quarantine_locked(NfInstance& inst, const std::string& reason) {
  append_event(inst, "reattest:revoked", reason);
  inst.lifecycle_state = LifecycleState::Terminating;
  if (inst.runtime.deregister_nrf) inst.runtime.deregister_nrf();
  if (inst.runtime.stop) inst.runtime.stop();
  reports_.erase(inst.endpoint);
  if (inst.svm->state() != tee::SvmState::Terminated) inst.svm->terminate();
  inst.lifecycle_state = LifecycleState::Terminated;
  append_event(inst, "terminated", "quarantined");
}

ReattestOutcome Orchestrator::reattest(const std::shared_ptr<NfInstance>& inst) {
  std::lock_guard op_lock(inst->op_mu);
  if (inst->lifecycle_state != LifecycleState::Operating)
    throw LifecycleError("reattest requires Operating state, instance is " +
                         std::string(lifecycle_state_name(inst->lifecycle_state)));
  inst->lifecycle_state = LifecycleState::Reattesting;
  append_event(*inst, "reattest:begin");
  reattest_count_++;

  tee::AttestationReport report;
  tee::Nonce nonce{};
  try {
    if (transport_fault_ && transport_fault_(inst->instance_id))
      throw TransportError("attestation transport unavailable");
    Bytes nb = crypto::random_bytes(nonce.size());
    std::copy(nb.begin(), nb.end(), nonce.begin());
    report = inst->svm->generate_report(nonce);
  } catch (const TransportError& e) {
    // Transport problems get the strike rule; verification failures never do.
    inst->transport_strikes++;
    if (inst->transport_strikes >= config_.transport_strike_limit) {
      quarantine_locked(*inst, std::string("transport strikes exhausted: ") + e.what());
      return ReattestOutcome::RevokedAndQuarantined;
    }
    inst->lifecycle_state = LifecycleState::Operating;
    append_event(*inst, "reattest:deferred", e.what());
    return ReattestOutcome::Deferred;
  }
  inst->transport_strikes = 0;

  auto verdict = verifier_.verify(report, nonce, policy_.allowlist, policy_.required_features);
  if (!verdict.verified) {
    inst->session.revoked = true;
    quarantine_locked(*inst, std::string("report rejected: ") +
                                 tee::verify_reject_name(verdict.reason));
    return ReattestOutcome::RevokedAndQuarantined;
  }

  auto attrs = attributes_from(report, inst.get());
  auto decision = zte::reevaluate(inst->session, attrs, policy_, clock_.now_ms());
  if (!decision.granted()) {
    std::string reasons;
    for (auto r : decision.reasons)
      reasons += std::string(reasons.empty() ? "" : ",") + zte::deny_reason_name(r);
    quarantine_locked(*inst, "policy revoked: " + reasons);
    return ReattestOutcome::RevokedAndQuarantined;
  }

  inst->session = *decision.session;
  inst->last_attested_ms = clock_.now_ms();
  // The fresh report rotated the channel key; future channels use the new one.
  reports_.put(inst->endpoint,
               sbi::ReportStore::Entry{inst->instance_id, report.channel_pubkey});
  inst->lifecycle_state = LifecycleState::Operating;
  append_event(*inst, "reattest:renewed");
  return ReattestOutcome::Renewed;
}

Bytes Orchestrator::terminate_nf(const std::shared_ptr<NfInstance>& inst) {
  std::lock_guard op_lock(inst->op_mu);
  if (inst->lifecycle_state == LifecycleState::Terminated)
    throw LifecycleError("instance already terminated");
  inst->lifecycle_state = LifecycleState::Terminating;
  append_event(*inst, "terminating");
  if (inst->runtime.deregister_nrf) inst->runtime.deregister_nrf();
  if (inst->runtime.stop) inst->runtime.stop();
  reports_.erase(inst->endpoint);
  Bytes log = inst->svm->terminate();
  inst->lifecycle_state = LifecycleState::Terminated;
  append_event(*inst, "terminated");
  return log;
}

void Orchestrator::tick() {
  std::vector<std::shared_ptr<NfInstance>> snapshot;
  {
    std::lock_guard lock(fleet_mu_);
    snapshot = fleet_;
  }
  TimeMs now = clock_.now_ms();
  for (const auto& inst : snapshot) {
    if (inst->lifecycle_state != LifecycleState::Operating) continue;
    if (config_.attestation_enabled &&
        now - inst->last_attested_ms >= config_.reattest_period_ms)
      reattest(inst);
  }
}

void Orchestrator::report_behavior_flag(const std::shared_ptr<NfInstance>& inst,
                                        const std::string& flag) {
  std::lock_guard op_lock(inst->op_mu);
  inst->behavior_flags.insert(flag);
}

std::shared_ptr<NfInstance> Orchestrator::find(const std::string& instance_id) const {
  std::lock_guard lock(fleet_mu_);
  for (const auto& inst : fleet_)
    if (inst->instance_id == instance_id) return inst;
  return nullptr;
}

}  // namespace confcore::vnfm
