#include "confcore/tee/tee.hpp"

#include <algorithm>
#include <cstdio>

namespace confcore::tee {

Measurement Measurement::from_hex(std::string_view h) {
  Bytes raw = hex_decode(h);
  if (raw.size() != 32) throw std::invalid_argument("measurement must be 32 bytes");
  Measurement m;
  std::copy(raw.begin(), raw.end(), m.digest.begin());
  return m;
}

Measurement measure(std::span<const std::uint8_t> code_image, const LaunchConfig& config) {
  Bytes input(code_image.begin(), code_image.end());
  // LaunchConfig is an ordered map, so iteration order is already canonical.
  for (const auto& [k, v] : config) {
    input.insert(input.end(), k.begin(), k.end());
    input.push_back('=');
    input.insert(input.end(), v.begin(), v.end());
    input.push_back('\n');
  }
  Bytes digest = crypto::sha256(input);
  Measurement m;
  std::copy(digest.begin(), digest.end(), m.digest.begin());
  return m;
}

namespace {
void put_blob(Bytes& out, std::span<const std::uint8_t> b) {
  put_u16(out, static_cast<std::uint16_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}
}  // namespace

Bytes AttestationReport::signed_payload() const {
  Bytes out;
  out.push_back(version);
  out.insert(out.end(), measurement.digest.begin(), measurement.digest.end());
  out.insert(out.end(), nonce.begin(), nonce.end());
  put_blob(out, to_bytes(platform_info.firmware_version));
  out.push_back(platform_info.features);
  put_blob(out, channel_pubkey);
  return out;
}

Bytes AttestationReport::serialize() const {
  Bytes out = signed_payload();
  put_blob(out, platform_signature);
  put_blob(out, platform_cert);
  return out;
}

AttestationReport AttestationReport::parse(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  AttestationReport rep;
  rep.version = r.u8();
  Bytes digest = r.take(32);
  std::copy(digest.begin(), digest.end(), rep.measurement.digest.begin());
  Bytes nonce = r.take(16);
  std::copy(nonce.begin(), nonce.end(), rep.nonce.begin());
  rep.platform_info.firmware_version = to_string(r.take(r.u16()));
  rep.platform_info.features = r.u8();
  rep.channel_pubkey = r.take(r.u16());
  rep.platform_signature = r.take(r.u16());
  rep.platform_cert = r.take(r.u16());
  if (!r.done()) throw std::invalid_argument("trailing bytes in report");
  return rep;
}

const char* svm_state_name(SvmState s) {
  switch (s) {
    case SvmState::Launched: return "Launched";
    case SvmState::Attested: return "Attested";
    case SvmState::Provisioned: return "Provisioned";
    case SvmState::Running: return "Running";
    case SvmState::Terminated: return "Terminated";
  }
  return "?";
}

Bytes Svm::seal(std::span<const std::uint8_t> plaintext, std::uint64_t counter) const {
  if (!(features_ & kMemoryEncryption)) return Bytes(plaintext.begin(), plaintext.end());
  return crypto::aead_seal(vm_key_, counter, plaintext);
}

std::optional<Bytes> Svm::open(const StoredValue& v) const {
  if (!(features_ & kMemoryEncryption)) return v.data;
  return crypto::aead_open(vm_key_, v.counter, v.data);
}

void Svm::put_protected(const std::string& key, std::span<const std::uint8_t> value) {
  std::lock_guard lock(mu_);
  if (state_ == SvmState::Terminated)
    throw TeeError(TeeErrorCode::TerminatedSvm, "svm terminated");
  std::uint64_t ctr = seal_counter_++;
  protected_store_[key] = StoredValue{ctr, seal(value, ctr)};
}

std::optional<Bytes> Svm::get_protected(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = protected_store_.find(key);
  if (it == protected_store_.end()) return std::nullopt;
  return open(it->second);
}

void Svm::put_unprotected(const std::string& key, std::span<const std::uint8_t> value) {
  std::lock_guard lock(mu_);
  unprotected_store_[key] = Bytes(value.begin(), value.end());
}

std::optional<Bytes> Svm::get_unprotected(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = unprotected_store_.find(key);
  if (it == unprotected_store_.end()) return std::nullopt;
  return it->second;
}

void Svm::append_log(std::string_view line) {
  // Each line is sealed as its own entry so appending stays O(line) instead of
  // re-sealing the whole log. Zero-padded sequence keys keep map order equal
  // to append order; terminate() reassembles them.
  std::uint64_t seq;
  {
    std::lock_guard lock(mu_);
    seq = log_seq_++;
  }
  char key[32];
  std::snprintf(key, sizeof(key), "__log/%016llu", static_cast<unsigned long long>(seq));
  Bytes entry(line.begin(), line.end());
  entry.push_back('\n');
  put_protected(key, entry);
}

AttestationReport Svm::generate_report(const Nonce& nonce) {
  {
    std::lock_guard lock(mu_);
    if (state_ == SvmState::Terminated)
      throw TeeError(TeeErrorCode::TerminatedSvm, "cannot attest a terminated svm");
  }
  auto chan = crypto::make_exchange_keypair();
  put_protected("__chan_priv", chan.secret_key);

  std::lock_guard lock(mu_);
  channel_pub_ = chan.public_key;
  AttestationReport rep;
  rep.measurement = measurement_;
  rep.nonce = nonce;
  rep.platform_info.firmware_version = platform_->firmware_version_;
  rep.platform_info.features = features_;
  rep.channel_pubkey = chan.public_key;
  rep.platform_signature = platform_->sign_report(rep.signed_payload());
  rep.platform_cert = platform_->platform_cert();
  return rep;
}

void Svm::mark_attested() {
  std::lock_guard lock(mu_);
  if (state_ == SvmState::Terminated)
    throw TeeError(TeeErrorCode::TerminatedSvm, "svm terminated");
  state_ = SvmState::Attested;
}

void Svm::mark_running() {
  std::lock_guard lock(mu_);
  state_ = SvmState::Running;
}

void Svm::provision(std::span<const std::uint8_t> channel_pubkey,
                    std::span<const std::uint8_t> payload) {
  {
    std::lock_guard lock(mu_);
    if (state_ != SvmState::Attested)
      throw TeeError(TeeErrorCode::NotAttested,
                     std::string("provision requires Attested state, svm is ") +
                         svm_state_name(state_));
    if (channel_pub_.empty() ||
        !std::equal(channel_pubkey.begin(), channel_pubkey.end(), channel_pub_.begin(),
                    channel_pub_.end()))
      throw TeeError(TeeErrorCode::ChannelMismatch, "channel key does not match report");
  }
  put_protected("__provisioned", payload);
  std::lock_guard lock(mu_);
  state_ = SvmState::Provisioned;
}

Bytes Svm::channel_confirm(std::span<const std::uint8_t> peer_ephemeral_pub) const {
  Bytes shared = crypto::shared_secret(channel_secret(), peer_ephemeral_pub);
  return crypto::derive_key(shared, "vnfm-confirm", peer_ephemeral_pub);
}

void Svm::provision_secure(std::span<const std::uint8_t> peer_ephemeral_pub,
                           std::span<const std::uint8_t> sealed_payload) {
  {
    std::lock_guard lock(mu_);
    if (state_ != SvmState::Attested)
      throw TeeError(TeeErrorCode::NotAttested,
                     std::string("provision requires Attested state, svm is ") +
                         svm_state_name(state_));
  }
  Bytes shared = crypto::shared_secret(channel_secret(), peer_ephemeral_pub);
  Bytes key = crypto::derive_key(shared, "vnfm-provision", peer_ephemeral_pub);
  auto payload = crypto::aead_open(key, 0, sealed_payload);
  if (!payload)
    throw TeeError(TeeErrorCode::ChannelMismatch, "provisioning payload failed to decrypt");
  put_protected("__provisioned", *payload);
  std::lock_guard lock(mu_);
  state_ = SvmState::Provisioned;
}

void Svm::provision_plaintext(std::span<const std::uint8_t> payload) {
  {
    std::lock_guard lock(mu_);
    if (state_ == SvmState::Terminated)
      throw TeeError(TeeErrorCode::TerminatedSvm, "svm terminated");
  }
  put_protected("__provisioned", payload);
  std::lock_guard lock(mu_);
  state_ = SvmState::Provisioned;
}

Bytes Svm::host_read() const {
  std::lock_guard lock(mu_);
  Bytes out;
  for (const auto& [k, v] : unprotected_store_) {
    out.insert(out.end(), k.begin(), k.end());
    out.push_back(0);
    out.insert(out.end(), v.begin(), v.end());
    out.push_back(0);
  }
  for (const auto& [k, v] : protected_store_) {
    out.insert(out.end(), k.begin(), k.end());
    out.push_back(0);
    out.insert(out.end(), v.data.begin(), v.data.end());
    out.push_back(0);
  }
  return out;
}

Bytes Svm::terminate() {
  std::lock_guard lock(mu_);
  if (state_ == SvmState::Terminated)
    throw TeeError(TeeErrorCode::AlreadyTerminated, "svm already terminated");
  Bytes log;
  for (auto it = protected_store_.lower_bound("__log/");
       it != protected_store_.end() && it->first.starts_with("__log/"); ++it) {
    if (auto plain = open(it->second)) log.insert(log.end(), plain->begin(), plain->end());
  }
  std::fill(vm_key_.begin(), vm_key_.end(), 0);
  vm_key_.clear();
  protected_store_.clear();
  channel_pub_.clear();
  state_ = SvmState::Terminated;
  return log;
}

Bytes Svm::channel_secret() const {
  auto priv = get_protected("__chan_priv");
  if (!priv) throw TeeError(TeeErrorCode::NotAttested, "no channel key present");
  return *priv;
}

void Svm::corrupt_measurement() {
  std::lock_guard lock(mu_);
  measurement_.digest[0] ^= 0xFF;
}

bool cross_key_decrypts(const Svm& key_source, const Svm& target) {
  std::unique_lock lock_a(key_source.mu_);
  std::unique_lock<std::mutex> lock_b;
  if (&key_source != &target) lock_b = std::unique_lock(target.mu_);
  for (const auto& [k, v] : target.protected_store_) {
    if (crypto::aead_open(key_source.vm_key_, v.counter, v.data)) return true;
  }
  return false;
}

TeePlatform::TeePlatform(const crypto::SigningKeyPair& manufacturer_root,
                         FeatureSet supported_features, std::string firmware_version)
    : supported_features_(supported_features), firmware_version_(std::move(firmware_version)) {
  platform_kp_ = crypto::make_signing_keypair();
  Bytes root_sig = crypto::sign(platform_kp_.public_key, manufacturer_root.secret_key);
  platform_cert_ = platform_kp_.public_key;
  platform_cert_.insert(platform_cert_.end(), root_sig.begin(), root_sig.end());
}

Bytes TeePlatform::sign_report(std::span<const std::uint8_t> payload) const {
  return crypto::sign(payload, platform_kp_.secret_key);
}

std::shared_ptr<Svm> TeePlatform::launch_svm(std::span<const std::uint8_t> code_image,
                                             const LaunchConfig& config, FeatureSet features) {
  if ((features & supported_features_) != features)
    throw TeeError(TeeErrorCode::UnsupportedFeature, "requested features not supported");
  auto svm = std::make_shared<Svm>();
  {
    std::lock_guard lock(mu_);
    svm->id_ = "svm-" + std::to_string(next_svm_++);
  }
  svm->measurement_ = measure(code_image, config);
  svm->features_ = features;
  svm->vm_key_ = crypto::random_bytes(crypto::kAeadKeySize);
  svm->platform_ = this;
  return svm;
}

const char* verify_reject_name(VerifyReject r) {
  switch (r) {
    case VerifyReject::None: return "verified";
    case VerifyReject::Signature: return "signature";
    case VerifyReject::Nonce: return "nonce";
    case VerifyReject::Measurement: return "measurement";
    case VerifyReject::Features: return "features";
    case VerifyReject::Malformed: return "malformed";
  }
  return "?";
}

namespace {
VerifyResult check_chain(const AttestationReport& report,
                         std::span<const std::uint8_t> root_pubkey, const Nonce& expected_nonce,
                         const std::set<Measurement>& allowlist, FeatureSet required_features) {
  if (report.platform_cert.size() != 32 + 64) return {false, VerifyReject::Malformed};
  std::span<const std::uint8_t> platform_pub(report.platform_cert.data(), 32);
  std::span<const std::uint8_t> root_sig(report.platform_cert.data() + 32, 64);
  if (!crypto::verify_signature(platform_pub, root_sig, root_pubkey))
    return {false, VerifyReject::Signature};
  if (!crypto::verify_signature(report.signed_payload(), report.platform_signature, platform_pub))
    return {false, VerifyReject::Signature};
  if (report.nonce != expected_nonce) return {false, VerifyReject::Nonce};
  if (!allowlist.contains(report.measurement)) return {false, VerifyReject::Measurement};
  if ((report.platform_info.features & required_features) != required_features)
    return {false, VerifyReject::Features};
  return {true, VerifyReject::None};
}
}  // namespace

VerifyResult verify_report_once(const AttestationReport& report,
                                std::span<const std::uint8_t> root_pubkey,
                                const Nonce& expected_nonce,
                                const std::set<Measurement>& allowlist,
                                FeatureSet required_features) {
  return check_chain(report, root_pubkey, expected_nonce, allowlist, required_features);
}

ReportVerifier::ReportVerifier(Bytes root_pubkey, std::size_t replay_cache_size)
    : root_pubkey_(std::move(root_pubkey)), cache_size_(replay_cache_size) {}

VerifyResult ReportVerifier::verify(const AttestationReport& report, const Nonce& expected_nonce,
                                    const std::set<Measurement>& allowlist,
                                    FeatureSet required_features) {
  {
    std::lock_guard lock(mu_);
    if (std::find(seen_nonces_.begin(), seen_nonces_.end(), report.nonce) != seen_nonces_.end())
      return {false, VerifyReject::Nonce};
  }
  VerifyResult result =
      check_chain(report, root_pubkey_, expected_nonce, allowlist, required_features);
  if (result.verified) {
    std::lock_guard lock(mu_);
    seen_nonces_.push_back(report.nonce);
    if (seen_nonces_.size() > cache_size_) seen_nonces_.erase(seen_nonces_.begin());
  }
  return result;
}

}  // namespace confcore::tee
