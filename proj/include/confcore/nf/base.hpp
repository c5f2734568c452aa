#pragma once

#include <json.hpp>

#include "confcore/sbi/channel.hpp"
#include "confcore/tee/tee.hpp"

namespace confcore::nf {

using Json = nlohmann::json;

/// Shared wiring handed to every NF: transport, clock, channel mode, and the
/// consumer-side store of verified channel keys maintained by the orchestrator.
struct CoreEnv {
  sbi::Transport* transport = nullptr;
  const Clock* clock = nullptr;
  sbi::ChannelMode mode = sbi::ChannelMode::Plain;
  sbi::ReportStore* reports = nullptr;
  std::string nrf_address;
  Bytes nrf_token_pubkey;       // NRF token verification key, distributed out of band
  Bytes vnfm_bootstrap_secret;  // authenticates first registrations before any token exists
};

/// Application-level error carried in SBI response bodies.
class NfError : public std::runtime_error {
 public:
  NfError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

Json error_body(const std::string& code, const std::string& message);
Bytes json_to_bytes(const Json& j);
Json json_from_bytes(std::span<const std::uint8_t> b);

/// Common producer/consumer machinery: endpoint binding, channel caching,
/// token acquisition from the NRF, request helpers.
class NfBase {
 public:
  NfBase(CoreEnv env, std::string instance_id, std::string nf_type, std::string address,
         std::shared_ptr<tee::Svm> svm);
  virtual ~NfBase();

  const std::string& instance_id() const { return instance_id_; }
  const std::string& nf_type() const { return nf_type_; }
  const std::string& address() const { return address_; }
  const std::shared_ptr<tee::Svm>& svm() const { return svm_; }
  std::shared_ptr<sbi::ServerEndpoint> endpoint() const { return endpoint_; }

  void bind();    // attach to the transport
  void unbind();  // detach (used by quarantine/termination)

  /// Sends a request, fetching/caching an NRF token for `scope` when non-empty.
  /// Throws NfError when the response body carries an error.
  Json call(const std::string& address, const std::string& service, const std::string& path,
            const Json& body, const std::string& scope = {},
            const std::string& audience = {});

  /// Token request to the NRF; uses the bootstrap MAC when the caller is not
  /// yet registered.
  sbi::AccessToken fetch_token(const std::string& audience,
                               const std::vector<std::string>& scope);

 protected:
  void log(std::string_view line);  // into the SVM-protected log when present
  sbi::Channel& channel_to(const std::string& address);

  CoreEnv env_;
  std::string instance_id_;
  std::string nf_type_;
  std::string address_;
  std::shared_ptr<tee::Svm> svm_;
  std::shared_ptr<sbi::ServerEndpoint> endpoint_;
  std::map<std::string, sbi::Channel> channels_;
  std::map<std::string, sbi::AccessToken> token_cache_;  // audience+scope
  std::mutex mu_;
};

/// Wraps a handler so NfError and other exceptions become error bodies.
sbi::RequestHandler json_handler(std::function<Json(const Json&)> fn);

}  // namespace confcore::nf
