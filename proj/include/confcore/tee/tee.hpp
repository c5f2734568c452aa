#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "confcore/crypto.hpp"

namespace confcore::tee {

// Feature ladder: memory encryption, register state encryption, integrity protection.
enum Feature : std::uint8_t {
  kMemoryEncryption = 0x01,
  kRegisterEncryption = 0x02,
  kIntegrityProtection = 0x04,
};
using FeatureSet = std::uint8_t;

inline constexpr FeatureSet kAllFeatures =
    kMemoryEncryption | kRegisterEncryption | kIntegrityProtection;

using LaunchConfig = std::map<std::string, std::string>;
using Nonce = std::array<std::uint8_t, 16>;

struct Measurement {
  std::array<std::uint8_t, 32> digest{};
  auto operator<=>(const Measurement&) const = default;
  std::string hex() const { return hex_encode(digest); }
  static Measurement from_hex(std::string_view h);
};

/// Launch digest over the code image and the canonicalized config
/// (sorted key=value lines).
Measurement measure(std::span<const std::uint8_t> code_image, const LaunchConfig& config);

struct PlatformInfo {
  std::string firmware_version;
  FeatureSet features = 0;
};

struct AttestationReport {
  std::uint8_t version = 1;
  Measurement measurement;
  Nonce nonce{};
  PlatformInfo platform_info;
  Bytes channel_pubkey;
  Bytes platform_signature;  // platform key over all prior fields
  Bytes platform_cert;       // platform pubkey (32B) || root signature (64B)

  Bytes signed_payload() const;
  Bytes serialize() const;
  static AttestationReport parse(std::span<const std::uint8_t> data);  // throws on malformed
};

enum class TeeErrorCode {
  UnsupportedFeature,
  TerminatedSvm,
  NotAttested,
  ChannelMismatch,
  AlreadyTerminated,
};

class TeeError : public std::runtime_error {
 public:
  TeeError(TeeErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  TeeErrorCode code() const { return code_; }

 private:
  TeeErrorCode code_;
};

enum class SvmState { Launched, Attested, Provisioned, Running, Terminated };

const char* svm_state_name(SvmState s);

class TeePlatform;

/// Emulated secure VM. The protected store is sealed under a per-SVM key when
/// the SVM was launched with memory encryption; the unprotected store models
/// host-visible memory. host_read() is the adversary's view.
class Svm {
 public:
  const std::string& id() const { return id_; }
  SvmState state() const { return state_; }
  const Measurement& measurement() const { return measurement_; }
  FeatureSet features() const { return features_; }

  // Inside-VM data access. get_protected decrypts with the VM key.
  void put_protected(const std::string& key, std::span<const std::uint8_t> value);
  std::optional<Bytes> get_protected(const std::string& key) const;
  void put_unprotected(const std::string& key, std::span<const std::uint8_t> value);
  std::optional<Bytes> get_unprotected(const std::string& key) const;
  void append_log(std::string_view line);

  AttestationReport generate_report(const Nonce& nonce);
  void mark_attested();
  void mark_running();
  void provision(std::span<const std::uint8_t> channel_pubkey,
                 std::span<const std::uint8_t> payload);

  /// Key confirmation for the report-bound secure channel: proves the VM holds
  /// the private half of the report's channel key.
  Bytes channel_confirm(std::span<const std::uint8_t> peer_ephemeral_pub) const;
  /// Provisioning over the secure channel: payload sealed under the key derived
  /// from (channel key, peer ephemeral); decrypted only inside the VM.
  void provision_secure(std::span<const std::uint8_t> peer_ephemeral_pub,
                        std::span<const std::uint8_t> sealed_payload);
  /// Baseline path for VMs deployed without attestation gating.
  void provision_plaintext(std::span<const std::uint8_t> payload);

  /// Host-visible snapshot: unprotected plaintext plus protected bytes as stored
  /// (ciphertext when memory encryption is on). Point-in-time consistent.
  Bytes host_read() const;

  /// Destroys the VM key, clears the protected store, returns the exported log.
  Bytes terminate();

  /// Channel key access from inside the VM (set by generate_report).
  Bytes channel_secret() const;
  const Bytes& channel_pubkey() const { return channel_pub_; }

  /// Test hook simulating a compromised image: subsequent reports carry a
  /// mutated measurement.
  void corrupt_measurement();

 private:
  friend class TeePlatform;
  friend bool cross_key_decrypts(const Svm& key_source, const Svm& target);

  struct StoredValue {
    std::uint64_t counter = 0;
    Bytes data;  // sealed when memory encryption is on
  };

  Bytes seal(std::span<const std::uint8_t> plaintext, std::uint64_t counter) const;
  std::optional<Bytes> open(const StoredValue& v) const;

  std::string id_;
  SvmState state_ = SvmState::Launched;
  Measurement measurement_;
  FeatureSet features_ = 0;
  Bytes vm_key_;
  std::map<std::string, StoredValue> protected_store_;
  std::map<std::string, Bytes> unprotected_store_;
  std::uint64_t seal_counter_ = 0;
  std::uint64_t log_seq_ = 0;
  Bytes channel_pub_;
  const TeePlatform* platform_ = nullptr;
  mutable std::mutex mu_;
};

/// Attempts to decrypt every protected entry of `target` with `key_source`'s
/// VM key; true if any entry opens. Adversarial test capability.
bool cross_key_decrypts(const Svm& key_source, const Svm& target);

/// Emulated platform: holds the platform signing key certified by the
/// manufacturer root, launches SVMs, signs their reports.
class TeePlatform {
 public:
  TeePlatform(const crypto::SigningKeyPair& manufacturer_root, FeatureSet supported_features,
              std::string firmware_version = "emu-1.0");

  FeatureSet supported_features() const { return supported_features_; }
  const Bytes& platform_cert() const { return platform_cert_; }

  std::shared_ptr<Svm> launch_svm(std::span<const std::uint8_t> code_image,
                                  const LaunchConfig& config, FeatureSet features);

 private:
  friend class Svm;
  Bytes sign_report(std::span<const std::uint8_t> payload) const;

  crypto::SigningKeyPair platform_kp_;
  Bytes platform_cert_;
  FeatureSet supported_features_;
  std::string firmware_version_;
  std::uint64_t next_svm_ = 1;
  mutable std::mutex mu_;
};

enum class VerifyReject { None, Signature, Nonce, Measurement, Features, Malformed };

const char* verify_reject_name(VerifyReject r);

struct VerifyResult {
  bool verified = false;
  VerifyReject reason = VerifyReject::None;
};

/// Verifies the two-link chain (root signs platform, platform signs report),
/// nonce freshness with a bounded replay cache, measurement allowlist, and
/// required features.
class ReportVerifier {
 public:
  explicit ReportVerifier(Bytes root_pubkey, std::size_t replay_cache_size = 1024);

  VerifyResult verify(const AttestationReport& report, const Nonce& expected_nonce,
                      const std::set<Measurement>& allowlist, FeatureSet required_features);

 private:
  Bytes root_pubkey_;
  std::size_t cache_size_;
  std::vector<Nonce> seen_nonces_;  // FIFO of the last N nonces
  std::mutex mu_;
};

/// Stateless chain check (signature chain + nonce echo + allowlist + features),
/// no replay cache. Used as the independent verification route in tests.
VerifyResult verify_report_once(const AttestationReport& report,
                                std::span<const std::uint8_t> root_pubkey,
                                const Nonce& expected_nonce,
                                const std::set<Measurement>& allowlist,
                                FeatureSet required_features);

}  // namespace confcore::tee
