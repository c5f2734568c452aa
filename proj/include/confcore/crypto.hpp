#pragma once

#include <optional>

#include "confcore/common.hpp"

namespace confcore::crypto {

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kAeadKeySize = 32;
inline constexpr std::size_t kAeadTagSize = 16;

void init();  // idempotent; aborts on libsodium failure

Bytes sha256(std::span<const std::uint8_t> data);
Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);
Bytes random_bytes(std::size_t n);  // OS entropy, for long-term keys

struct SigningKeyPair {
  Bytes public_key;
  Bytes secret_key;
};

SigningKeyPair make_signing_keypair();
Bytes sign(std::span<const std::uint8_t> msg, std::span<const std::uint8_t> secret_key);
bool verify_signature(std::span<const std::uint8_t> msg, std::span<const std::uint8_t> sig,
                      std::span<const std::uint8_t> public_key);

struct ExchangeKeyPair {
  Bytes public_key;
  Bytes secret_key;
};

ExchangeKeyPair make_exchange_keypair();
Bytes exchange_public_key(std::span<const std::uint8_t> secret);
Bytes shared_secret(std::span<const std::uint8_t> my_secret,
                    std::span<const std::uint8_t> peer_public);

/// Authenticated encryption with an explicit 64-bit counter nonce.
/// Output is ciphertext || 16-byte tag.
Bytes aead_seal(std::span<const std::uint8_t> key, std::uint64_t counter,
                std::span<const std::uint8_t> plaintext);
std::optional<Bytes> aead_open(std::span<const std::uint8_t> key, std::uint64_t counter,
                               std::span<const std::uint8_t> sealed);

/// Labelled key derivation: HMAC-SHA256(secret, label || 0x00 || context).
Bytes derive_key(std::span<const std::uint8_t> secret, std::string_view label,
                 std::span<const std::uint8_t> context = {});

}  // namespace confcore::crypto
