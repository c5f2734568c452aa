#pragma once

#include "confcore/nf/suci.hpp"
#include "confcore/nf/base.hpp"

namespace confcore::nf {

struct SubscriberRecord {
  std::string supi;
  Bytes k;  // 16-byte long-term key
  std::uint64_t sqn = 0;
  std::string home_network_keypair_ref;
};

/// Deterministic subscriber generation shared with the UE simulator so both
/// sides can be seeded independently and cross-checked.
std::vector<SubscriberRecord> generate_subscribers(std::size_t n, std::uint64_t seed);

struct UdmOptions {
  std::string db_path;  // empty disables on-disk persistence
  bool flush_on_write = true;
};

/// Subscriber database, SUPI de-concealment, and authentication vectors.
class Udm : public NfBase {
 public:
  using Options = UdmOptions;

  Udm(CoreEnv env, std::string instance_id, std::string address,
      std::shared_ptr<tee::Svm> svm = nullptr, Options options = {});

  const std::string& home_key_id() const { return home_key_id_; }
  const Bytes& home_pubkey() const { return home_pub_; }

  struct CreateReport {
    std::size_t created = 0;
    double elapsed_ms = 0;
  };
  CreateReport create_subscribers(std::size_t n, std::uint64_t seed);
  void add_subscriber(const SubscriberRecord& rec);
  void seed(const std::vector<SubscriberRecord>& records);
  std::size_t import_file(const std::string& path);  // lines: supi,k_hex,sqn
  void clear_subscribers();
  std::size_t subscriber_count() const;
  std::optional<SubscriberRecord> find_subscriber(const std::string& supi) const;

  std::string deconceal(const Suci& suci) const;  // throws NfError on MacFailure/UnknownKeyId

 private:
  void install_handlers();
  void persist(const SubscriberRecord& rec);
  Bytes home_privkey() const;

  Options options_;
  std::string home_key_id_;
  Bytes home_pub_;
  Bytes home_priv_plain_;  // only used when no SVM hosts us
  std::map<std::string, SubscriberRecord> subscribers_;
  mutable std::mutex db_mu_;
};

}  // namespace confcore::nf
