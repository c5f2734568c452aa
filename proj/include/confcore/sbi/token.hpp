#pragma once

#include <string>
#include <vector>

#include "confcore/common.hpp"

namespace confcore::sbi {

/// Self-contained signed access token; the NRF signs, producers verify locally.
struct AccessToken {
  std::string subject;   // consumer NF instance id
  std::string audience;  // producer NF type
  std::vector<std::string> scope;
  TimeMs issued_at = 0;
  TimeMs expires_at = 0;
  Bytes signature;  // over the canonical encoding of all prior fields

  Bytes signing_input() const;
  Bytes serialize() const;
  static AccessToken parse(std::span<const std::uint8_t> data);  // throws on malformed input
};

AccessToken issue_token(std::string subject, std::string audience,
                        std::vector<std::string> scope, TimeMs issued_at, TimeMs expires_at,
                        std::span<const std::uint8_t> signing_key);

enum class TokenReject {
  None,       // accepted
  Malformed,
  Signature,
  Expired,
  Scope,
  Audience,
};

const char* token_reject_name(TokenReject r);

/// Total check: accept iff signature valid, unexpired at `now`, scope present,
/// audience matches the producer's NF type.
TokenReject verify_token(const AccessToken& tok, std::string_view required_scope,
                         std::string_view producer_type,
                         std::span<const std::uint8_t> nrf_pubkey, TimeMs now);

/// Same check starting from wire bytes; empty input rejects as Malformed.
TokenReject verify_token_bytes(std::span<const std::uint8_t> token_bytes,
                               std::string_view required_scope, std::string_view producer_type,
                               std::span<const std::uint8_t> nrf_pubkey, TimeMs now);

}  // namespace confcore::sbi
