#include "confcore/sbi/channel.hpp"

namespace confcore::sbi {

void ReportStore::put(const std::string& endpoint, Entry entry) {
  entries_[endpoint] = std::move(entry);
}

void ReportStore::erase(const std::string& endpoint) { entries_.erase(endpoint); }

const ReportStore::Entry* ReportStore::find(const std::string& endpoint) const {
  auto it = entries_.find(endpoint);
  return it == entries_.end() ? nullptr : &it->second;
}

ServerEndpoint::ServerEndpoint(std::string instance_id, std::string nf_type, const Clock* clock)
    : instance_id_(std::move(instance_id)), nf_type_(std::move(nf_type)), clock_(clock) {}

void ServerEndpoint::set_channel_keypair(crypto::ExchangeKeyPair kp) {
  channel_pub_ = kp.public_key;
  channel_kp_ = std::move(kp);
  channel_secret_provider_ = nullptr;
}

void ServerEndpoint::set_channel_secret_provider(std::function<Bytes()> provider) {
  channel_secret_provider_ = std::move(provider);
  channel_kp_ = {};
}

void ServerEndpoint::add_handler(const std::string& service, const std::string& path,
                                 RequestHandler handler, std::string required_scope) {
  std::lock_guard lock(mu_);
  handlers_[service + "\n" + path] = HandlerSpec{std::move(handler), std::move(required_scope)};
}

namespace {
struct SessionKeys {
  Bytes c2s;
  Bytes s2c;
  Bytes confirm;
};

SessionKeys derive_session_keys(std::span<const std::uint8_t> shared,
                                std::span<const std::uint8_t> client_eph,
                                std::span<const std::uint8_t> server_pub) {
  Bytes transcript(client_eph.begin(), client_eph.end());
  transcript.insert(transcript.end(), server_pub.begin(), server_pub.end());
  return SessionKeys{
      crypto::derive_key(shared, "sbi-c2s", transcript),
      crypto::derive_key(shared, "sbi-s2c", transcript),
      crypto::derive_key(shared, "sbi-confirm", transcript),
  };
}
}  // namespace

ServerEndpoint::HandshakeResult ServerEndpoint::accept_handshake(
    std::span<const std::uint8_t> client_ephemeral_pub) {
  Bytes secret;
  Bytes pub;
  {
    std::lock_guard lock(mu_);
    secret = channel_secret_provider_ ? channel_secret_provider_() : channel_kp_.secret_key;
    pub = channel_pub_;
  }
  if (secret.empty())
    throw SbiError(SbiErrorCode::HandshakeFailure, "endpoint has no channel key");
  if (pub.empty()) pub = crypto::exchange_public_key(secret);
  Bytes shared = crypto::shared_secret(secret, client_ephemeral_pub);
  auto keys = derive_session_keys(shared, client_ephemeral_pub, pub);

  std::lock_guard lock(mu_);
  std::uint64_t id = next_conn_id_++;
  Connection conn;
  conn.encrypted = true;
  conn.recv_key = keys.c2s;
  conn.send_key = keys.s2c;
  connections_[id] = std::move(conn);
  return HandshakeResult{id, pub, keys.confirm};
}

std::uint64_t ServerEndpoint::accept_plain() {
  std::lock_guard lock(mu_);
  std::uint64_t id = next_conn_id_++;
  connections_[id] = Connection{};
  return id;
}

Bytes ServerEndpoint::handle_frame(std::uint64_t conn_id, const Bytes& frame) {
  Connection* conn;
  {
    std::lock_guard lock(mu_);
    auto it = connections_.find(conn_id);
    if (it == connections_.end())
      throw SbiError(SbiErrorCode::ChannelClosed, "unknown connection");
    if (it->second.closed)
      throw SbiError(SbiErrorCode::ChannelClosed, "connection closed");
    conn = &it->second;
  }

  SbiMessage request;
  if (conn->encrypted) {
    if (!frame_is_encrypted(frame)) {
      conn->closed = true;
      throw SbiError(SbiErrorCode::IntegrityFailure, "cleartext frame on attested channel");
    }
    std::uint64_t ctr = conn->recv_counter;
    try {
      request = decode_frame_encrypted(frame, [&](const Bytes& sealed) {
        return crypto::aead_open(conn->recv_key, ctr, sealed);
      });
    } catch (const std::invalid_argument& e) {
      conn->closed = true;
      throw SbiError(SbiErrorCode::IntegrityFailure, e.what());
    }
    conn->recv_counter++;
  } else {
    request = decode_frame(frame);
  }

  SbiMessage response = dispatch(request);
  response.request_id = request.request_id;
  response.is_response = true;
  response.timestamp = clock_ ? clock_->now_ms() : 0;

  if (conn->encrypted) {
    std::uint64_t ctr = conn->send_counter++;
    return encode_frame_encrypted(response, [&](const Bytes& tail) {
      return crypto::aead_seal(conn->send_key, ctr, tail);
    });
  }
  return encode_frame(response);
}

SbiMessage ServerEndpoint::dispatch(const SbiMessage& request) {
  HandlerSpec spec;
  {
    std::lock_guard lock(mu_);
    auto it = handlers_.find(request.service + "\n" + request.path);
    if (it == handlers_.end())
      throw SbiError(SbiErrorCode::ConnectionRefused,
                     "no handler for " + request.service + " " + request.path);
    spec = it->second;
  }
  if (!spec.required_scope.empty()) {
    TimeMs now = clock_ ? clock_->now_ms() : 0;
    TokenReject verdict =
        verify_token_bytes(request.token, spec.required_scope, nf_type_, nrf_pubkey_, now);
    if (verdict != TokenReject::None)
      throw SbiError(SbiErrorCode::Unauthorized,
                     std::string("token rejected: ") + token_reject_name(verdict));
    std::lock_guard lock(mu_);
    token_accepts_++;
    protected_invocations_++;
  }
  return spec.fn(request);
}

void Transport::bind(const std::string& address, std::shared_ptr<ServerEndpoint> endpoint) {
  std::lock_guard lock(mu_);
  endpoints_[address] = std::move(endpoint);
}

void Transport::unbind(const std::string& address) {
  std::lock_guard lock(mu_);
  endpoints_.erase(address);
}

std::shared_ptr<ServerEndpoint> Transport::resolve(const std::string& address) const {
  std::lock_guard lock(mu_);
  auto it = endpoints_.find(address);
  return it == endpoints_.end() ? nullptr : it->second;
}

SbiMessage Channel::send_request(SbiMessage msg) {
  msg.request_id = next_request_id_++;
  msg.is_response = false;
  msg.timestamp = clock_ ? clock_->now_ms() : 0;

  Bytes frame;
  std::uint64_t expected_id = msg.request_id;
  if (mode_ == ChannelMode::Attested) {
    std::uint64_t ctr = send_counter_++;
    frame = encode_frame_encrypted(
        msg, [&](const Bytes& tail) { return crypto::aead_seal(send_key_, ctr, tail); });
  } else {
    frame = encode_frame(msg);
  }

  Bytes raw = deliver_raw(frame);
  SbiMessage response = decode_response(raw);
  if (response.request_id != expected_id)
    throw SbiError(SbiErrorCode::IntegrityFailure, "response correlation mismatch");
  return response;
}

Bytes Channel::deliver_raw(const Bytes& frame) {
  if (closed_) throw SbiError(SbiErrorCode::ChannelClosed, "channel closed");
  if (!server_) throw SbiError(SbiErrorCode::Timeout, "endpoint unreachable");
  return server_->handle_frame(conn_id_, frame);
}

Bytes Channel::encode_request(SbiMessage msg) {
  msg.request_id = next_request_id_++;
  msg.is_response = false;
  msg.timestamp = clock_ ? clock_->now_ms() : 0;
  if (mode_ == ChannelMode::Attested) {
    std::uint64_t ctr = send_counter_++;
    return encode_frame_encrypted(
        msg, [&](const Bytes& tail) { return crypto::aead_seal(send_key_, ctr, tail); });
  }
  return encode_frame(msg);
}

SbiMessage Channel::decode_response(const Bytes& frame) {
  if (mode_ == ChannelMode::Attested) {
    std::uint64_t ctr = recv_counter_;
    SbiMessage response = decode_frame_encrypted(frame, [&](const Bytes& sealed) {
      return crypto::aead_open(recv_key_, ctr, sealed);
    });
    recv_counter_++;
    return response;
  }
  return decode_frame(frame);
}

Channel open_channel(const ChannelIdentity& local, Transport& transport,
                     const std::string& remote_endpoint, ChannelMode mode,
                     const ReportStore& reports, const Clock& clock) {
  (void)local;
  auto server = transport.resolve(remote_endpoint);
  if (!server)
    throw SbiError(SbiErrorCode::ConnectionRefused, "no endpoint at " + remote_endpoint);

  Channel ch;
  ch.server_ = server;
  ch.remote_endpoint_ = remote_endpoint;
  ch.mode_ = mode;
  ch.clock_ = &clock;

  if (mode == ChannelMode::Plain) {
    ch.conn_id_ = server->accept_plain();
    return ch;
  }

  const ReportStore::Entry* entry = reports.find(remote_endpoint);
  if (!entry)
    throw SbiError(SbiErrorCode::AttestationMissing,
                   "no verified report for " + remote_endpoint);

  auto eph = crypto::make_exchange_keypair();
  auto result = server->accept_handshake(eph.public_key);
  // Session keys are computed from the REPORT-delivered key, not the key the
  // server claims in the handshake, so a key-substitution fails confirmation.
  Bytes shared = crypto::shared_secret(eph.secret_key, entry->channel_pubkey);
  Bytes transcript = eph.public_key;
  transcript.insert(transcript.end(), entry->channel_pubkey.begin(),
                    entry->channel_pubkey.end());
  Bytes expected_confirm = crypto::derive_key(shared, "sbi-confirm", transcript);
  if (expected_confirm != result.confirm)
    throw SbiError(SbiErrorCode::HandshakeFailure, "key confirmation mismatch");

  ch.conn_id_ = result.conn_id;
  ch.send_key_ = crypto::derive_key(shared, "sbi-c2s", transcript);
  ch.recv_key_ = crypto::derive_key(shared, "sbi-s2c", transcript);
  return ch;
}

}  // namespace confcore::sbi
