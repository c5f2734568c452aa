#pragma once

#include "confcore/crypto.hpp"

namespace confcore::nf {

/// Concealed permanent identifier: ECIES-style, ephemeral key agreement with
/// the home network public key, AEAD over the SUPI.
struct Suci {
  std::uint8_t scheme_id = 1;
  std::string home_pubkey_id;
  Bytes ephemeral_pubkey;
  Bytes ciphertext;
  Bytes mac;  // 16-byte authentication tag, checked before decryption

  Bytes serialize() const;
  static Suci parse(std::span<const std::uint8_t> data);
};

Suci conceal_supi(std::string_view supi, const std::string& home_pubkey_id,
                  std::span<const std::uint8_t> home_pubkey);

enum class DeconcealError { None, UnknownKeyId, MacFailure };

struct DeconcealResult {
  DeconcealError error = DeconcealError::None;
  std::string supi;
};

DeconcealResult deconceal_supi(const Suci& suci, const std::string& expected_key_id,
                               std::span<const std::uint8_t> home_privkey);

}  // namespace confcore::nf
