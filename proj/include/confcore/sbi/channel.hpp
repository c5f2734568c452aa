#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "confcore/crypto.hpp"
#include "confcore/sbi/message.hpp"
#include "confcore/sbi/token.hpp"

namespace confcore::sbi {

enum class SbiErrorCode {
  ConnectionRefused,
  AttestationMissing,
  HandshakeFailure,
  Unauthorized,
  IntegrityFailure,
  Timeout,
  ChannelClosed,
};

class SbiError : public std::runtime_error {
 public:
  SbiError(SbiErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  SbiErrorCode code() const { return code_; }

 private:
  SbiErrorCode code_;
};

enum class ChannelMode { Plain, Attested };

struct ChannelIdentity {
  std::string peer_id;
  Bytes key_fingerprint;  // sha256 of the peer's channel public key
  bool attested = false;
};

/// Verified channel keys, indexed by remote endpoint address. Entries are only
/// added after report verification, so attested=true is backed by evidence.
class ReportStore {
 public:
  struct Entry {
    std::string peer_id;
    Bytes channel_pubkey;
  };
  void put(const std::string& endpoint, Entry entry);
  void erase(const std::string& endpoint);
  const Entry* find(const std::string& endpoint) const;

 private:
  std::map<std::string, Entry> entries_;
};

using RequestHandler = std::function<SbiMessage(const SbiMessage&)>;

/// Producer side of the SBI: owns the channel keypair, verifies tokens,
/// dispatches requests to registered service handlers.
class ServerEndpoint {
 public:
  ServerEndpoint(std::string instance_id, std::string nf_type, const Clock* clock);

  const std::string& instance_id() const { return instance_id_; }
  const std::string& nf_type() const { return nf_type_; }

  void set_channel_keypair(crypto::ExchangeKeyPair kp);
  /// Deferred secret access, e.g. from an SVM's protected store.
  void set_channel_secret_provider(std::function<Bytes()> provider);
  const Bytes& channel_pubkey() const { return channel_pub_; }

  void set_token_key(Bytes nrf_pubkey) { nrf_pubkey_ = std::move(nrf_pubkey); }

  /// required_scope empty means the handler is not token-protected.
  void add_handler(const std::string& service, const std::string& path, RequestHandler handler,
                   std::string required_scope = {});

  struct HandshakeResult {
    std::uint64_t conn_id;
    Bytes server_pubkey;
    Bytes confirm;  // key-confirmation value the client recomputes
  };
  HandshakeResult accept_handshake(std::span<const std::uint8_t> client_ephemeral_pub);
  std::uint64_t accept_plain();

  /// Handles one raw frame on a connection; returns the raw response frame.
  /// Throws SbiError on authorization or integrity failure.
  Bytes handle_frame(std::uint64_t conn_id, const Bytes& frame);

  // Test observability: protected-handler executions vs token acceptances.
  std::uint64_t protected_invocations() const { return protected_invocations_; }
  std::uint64_t token_accepts() const { return token_accepts_; }

 private:
  struct Connection {
    bool encrypted = false;
    bool closed = false;
    Bytes recv_key;  // client-to-server
    Bytes send_key;  // server-to-client
    std::uint64_t recv_counter = 0;
    std::uint64_t send_counter = 0;
  };
  struct HandlerSpec {
    RequestHandler fn;
    std::string required_scope;
  };

  SbiMessage dispatch(const SbiMessage& request);

  std::string instance_id_;
  std::string nf_type_;
  const Clock* clock_;
  crypto::ExchangeKeyPair channel_kp_;
  Bytes channel_pub_;
  std::function<Bytes()> channel_secret_provider_;
  Bytes nrf_pubkey_;
  std::map<std::string, HandlerSpec> handlers_;  // key: service + "\n" + path
  std::map<std::uint64_t, Connection> connections_;
  std::uint64_t next_conn_id_ = 1;
  std::uint64_t protected_invocations_ = 0;
  std::uint64_t token_accepts_ = 0;
  mutable std::mutex mu_;
};

/// In-process address registry standing in for the network.
class Transport {
 public:
  void bind(const std::string& address, std::shared_ptr<ServerEndpoint> endpoint);
  void unbind(const std::string& address);
  std::shared_ptr<ServerEndpoint> resolve(const std::string& address) const;

 private:
  std::map<std::string, std::shared_ptr<ServerEndpoint>> endpoints_;
  mutable std::mutex mu_;
};

/// Consumer side of one open connection.
class Channel {
 public:
  bool attested() const { return mode_ == ChannelMode::Attested; }
  const std::string& remote_endpoint() const { return remote_endpoint_; }

  /// Assigns a fresh request_id, stamps the clock, returns the correlated response.
  SbiMessage send_request(SbiMessage msg);

  /// Adversary/test hook: inject raw frame bytes and return the raw response.
  Bytes deliver_raw(const Bytes& frame);
  /// Encodes a request the way send_request would, without delivering it.
  Bytes encode_request(SbiMessage msg);
  SbiMessage decode_response(const Bytes& frame);

  void close() { closed_ = true; }

 private:
  friend Channel open_channel(const ChannelIdentity& local, Transport& transport,
                              const std::string& remote_endpoint, ChannelMode mode,
                              const ReportStore& reports, const Clock& clock);
  std::shared_ptr<ServerEndpoint> server_;
  std::string remote_endpoint_;
  ChannelMode mode_ = ChannelMode::Plain;
  std::uint64_t conn_id_ = 0;
  Bytes send_key_;  // client-to-server
  Bytes recv_key_;  // server-to-client
  std::uint64_t send_counter_ = 0;
  std::uint64_t recv_counter_ = 0;
  std::uint64_t next_request_id_ = 1;
  const Clock* clock_ = nullptr;
  bool closed_ = false;
};

/// Opens a connection to `remote_endpoint`. Attested mode requires a verified
/// report entry for the endpoint in `reports`; the handshake binds the session
/// keys to the report-delivered channel key.
Channel open_channel(const ChannelIdentity& local, Transport& transport,
                     const std::string& remote_endpoint, ChannelMode mode,
                     const ReportStore& reports, const Clock& clock);

}  // namespace confcore::sbi
