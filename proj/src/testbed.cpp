#include "confcore/testbed.hpp"

#include <cctype>
#include <fstream>

namespace confcore::testbed {

namespace {

std::string lower_name(vnfm::NfType t) {
  std::string s = vnfm::nf_type_name(t);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Topology Topology::standard() {
  Topology t;
  for (auto type : {vnfm::NfType::NRF, vnfm::NfType::UDM, vnfm::NfType::AUSF,
                    vnfm::NfType::SMF, vnfm::NfType::NSSF, vnfm::NfType::UPF,
                    vnfm::NfType::AMF})
    t.nfs.push_back({type, lower_name(type) + ".core"});
  return t;
}

Topology Topology::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file: " + path);
  nf::Json doc = nf::Json::parse(in);

  Topology t;
  for (const auto& entry : doc.at("nfs")) {
    std::string type_s = entry.at("type").get<std::string>();
    auto type = vnfm::parse_nf_type(type_s);
    if (!type) throw std::runtime_error("unknown nf type in topology: " + type_s);
    std::string endpoint = entry.value("endpoint", lower_name(*type) + ".core");
    t.nfs.push_back({*type, endpoint});
  }
  t.policy_path = doc.value("policy", std::string{});
  std::string boot = doc.value("bootstrap", "trusted-host");
  if (boot == "trusted-host")
    t.bootstrap = vnfm::Orchestrator::Bootstrap::TrustedHost;
  else if (boot == "self-attested")
    t.bootstrap = vnfm::Orchestrator::Bootstrap::SelfAttested;
  else
    throw std::runtime_error("unknown bootstrap mode: " + boot);
  return t;
}

Bytes Core::nf_code_image(vnfm::NfType type) {
  return to_bytes("nf-image-" + lower_name(type) + "-v1");
}

tee::LaunchConfig Core::nf_launch_config(vnfm::NfType type) {
  return {{"role", vnfm::nf_type_name(type)}, {"version.core", "1.0.0"}};
}

std::vector<std::string> Core::nf_services(vnfm::NfType type) {
  switch (type) {
    case vnfm::NfType::NRF: return {"nnrf-nfm", "nnrf-disc", "nnrf-token"};
    case vnfm::NfType::UDM: return {"nudm-ueau", "nudm-sdm"};
    case vnfm::NfType::AUSF: return {"nausf-auth"};
    case vnfm::NfType::AMF: return {"namf-comm"};
    case vnfm::NfType::SMF: return {"nsmf-pdusession"};
    case vnfm::NfType::NSSF: return {"nnssf-nsselection"};
    case vnfm::NfType::UPF: return {"nupf-data"};
  }
  return {};
}

std::string Core::nf_secret(vnfm::NfType type, std::uint64_t seed) {
  return "nf-secret-" + lower_name(type) + "-" + std::to_string(seed);
}

Core::Core(const Topology& topology, Options options)
    : options_(std::move(options)),
      clock_(options_.clock ? options_.clock : &default_clock_),
      root_(crypto::make_signing_keypair()) {
  platform_ = std::make_unique<tee::TeePlatform>(root_, tee::kAllFeatures);

  bool attested = options_.mode == sbi::ChannelMode::Attested;

  zte::PolicyDocument policy = topology.policy_path.empty()
                                   ? options_.policy
                                   : zte::load_policy_file(topology.policy_path);
  for (const auto& entry : topology.nfs)
    policy.allowlist.insert(
        tee::measure(nf_code_image(entry.type), nf_launch_config(entry.type)));
  if (attested && policy.required_features == 0)
    policy.required_features = tee::kAllFeatures;

  vnfm::Orchestrator::Config orch_cfg = options_.orchestrator;
  orch_cfg.bootstrap = topology.bootstrap;
  orch_cfg.attestation_enabled = attested;
  if (!policy.deployment_rules.contains(orch_cfg.deployment_class))
    policy.deployment_rules[orch_cfg.deployment_class] = true;

  std::string nrf_endpoint;
  for (const auto& entry : topology.nfs)
    if (entry.type == vnfm::NfType::NRF) nrf_endpoint = entry.endpoint;
  if (nrf_endpoint.empty()) throw std::runtime_error("topology has no NRF");

  env_.transport = &transport_;
  env_.clock = clock_;
  env_.mode = options_.mode;
  env_.reports = &reports_;
  env_.nrf_address = nrf_endpoint;
  env_.vnfm_bootstrap_secret = crypto::random_bytes(32);

  orchestrator_ = std::make_unique<vnfm::Orchestrator>(
      *platform_, root_.public_key, std::move(policy), *clock_, reports_,
      [this](const vnfm::NfSpec& spec, const std::shared_ptr<tee::Svm>& svm) {
        return make_runtime(spec, svm);
      },
      orch_cfg);

  // The NRF deploys first so every later NF can fetch tokens and register.
  std::vector<TopologyEntry> ordered;
  for (const auto& e : topology.nfs)
    if (e.type == vnfm::NfType::NRF) ordered.push_back(e);
  for (const auto& e : topology.nfs)
    if (e.type != vnfm::NfType::NRF) ordered.push_back(e);

  for (const auto& entry : ordered) {
    vnfm::NfSpec spec;
    spec.nf_type = entry.type;
    spec.instance_id = lower_name(entry.type) + "-1";
    spec.code_image = nf_code_image(entry.type);
    spec.launch_config = nf_launch_config(entry.type);
    spec.required_features = attested ? tee::kAllFeatures : 0;
    spec.provisioning_payload = to_bytes(nf_secret(entry.type, options_.seed));
    spec.endpoint = entry.endpoint;
    instances_[entry.type] = orchestrator_->deploy_nf(spec);
  }
}

vnfm::NfRuntime Core::make_runtime(const vnfm::NfSpec& spec,
                                   const std::shared_ptr<tee::Svm>& svm) {
  std::shared_ptr<nf::NfBase> obj;
  switch (spec.nf_type) {
    case vnfm::NfType::NRF:
      nrf_ = std::make_shared<nf::Nrf>(env_, spec.instance_id, spec.endpoint, svm);
      env_.nrf_token_pubkey = nrf_->token_pubkey();
      obj = nrf_;
      break;
    case vnfm::NfType::UDM: {
      nf::Udm::Options opt;
      opt.db_path = options_.udm_db_path;
      udm_ = std::make_shared<nf::Udm>(env_, spec.instance_id, spec.endpoint, svm, opt);
      obj = udm_;
      break;
    }
    case vnfm::NfType::AUSF:
      ausf_ = std::make_shared<nf::Ausf>(env_, spec.instance_id, spec.endpoint, svm);
      obj = ausf_;
      break;
    case vnfm::NfType::AMF:
      amf_ = std::make_shared<nf::Amf>(env_, spec.instance_id, spec.endpoint, svm);
      obj = amf_;
      break;
    case vnfm::NfType::SMF:
      smf_ = std::make_shared<nf::Smf>(env_, spec.instance_id, spec.endpoint, svm);
      obj = smf_;
      break;
    case vnfm::NfType::NSSF:
      nssf_ = std::make_shared<nf::Nssf>(env_, spec.instance_id, spec.endpoint, svm);
      obj = nssf_;
      break;
    case vnfm::NfType::UPF:
      upf_ = std::make_shared<nf::Upf>(env_, spec.instance_id, spec.endpoint, svm);
      obj = upf_;
      break;
  }
  obj->bind();
  nfs_[spec.endpoint] = obj;

  vnfm::NfRuntime rt;
  if (spec.nf_type == vnfm::NfType::NRF) {
    // The NRF is its own registry; registration is implicit.
    rt.register_nrf = [] {};
    rt.deregister_nrf = [] {};
  } else {
    std::weak_ptr<nf::NfBase> weak = obj;
    vnfm::NfType type = spec.nf_type;
    rt.register_nrf = [this, weak, type] {
      auto nf = weak.lock();
      if (!nf) throw std::runtime_error("nf gone before registration");
      nf::NfProfile profile;
      profile.instance_id = nf->instance_id();
      profile.nf_type = nf->nf_type();
      profile.services = nf_services(type);
      profile.endpoint = nf->address();
      nf->call(env_.nrf_address, "nnrf-nfm", "register",
               nf::Json{{"profile", profile.to_json()}}, "nnrf-nfm", "NRF");
    };
    rt.deregister_nrf = [this, weak] {
      auto nf = weak.lock();
      if (!nf) return;
      nf->call(env_.nrf_address, "nnrf-nfm", "deregister",
               nf::Json{{"instance_id", nf->instance_id()}}, "nnrf-nfm", "NRF");
    };
  }
  std::string endpoint = spec.endpoint;
  rt.stop = [this, endpoint] {
    auto it = nfs_.find(endpoint);
    if (it == nfs_.end()) return;
    it->second->unbind();
    nfs_.erase(it);
  };
  return rt;
}

std::shared_ptr<vnfm::NfInstance> Core::instance_of(vnfm::NfType type) const {
  auto it = instances_.find(type);
  return it == instances_.end() ? nullptr : it->second;
}

}  // namespace confcore::testbed
