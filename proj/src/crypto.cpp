#include "confcore/crypto.hpp"

#include <sodium.h>

#include <cstdlib>
#include <cstring>

namespace confcore::crypto {

void init() {
  if (sodium_init() < 0) std::abort();
}

namespace {
struct Initializer {
  Initializer() { init(); }
} g_initializer;
}  // namespace

Bytes sha256(std::span<const std::uint8_t> data) {
  Bytes out(crypto_hash_sha256_BYTES);
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  Bytes out(crypto_auth_hmacsha256_BYTES);
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  crypto_auth_hmacsha256_update(&st, data.data(), data.size());
  crypto_auth_hmacsha256_final(&st, out.data());
  return out;
}

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  randombytes_buf(out.data(), n);
  return out;
}

SigningKeyPair make_signing_keypair() {
  SigningKeyPair kp;
  kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
  kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

Bytes sign(std::span<const std::uint8_t> msg, std::span<const std::uint8_t> secret_key) {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), secret_key.data());
  return sig;
}

bool verify_signature(std::span<const std::uint8_t> msg, std::span<const std::uint8_t> sig,
                      std::span<const std::uint8_t> public_key) {
  if (sig.size() != crypto_sign_BYTES || public_key.size() != crypto_sign_PUBLICKEYBYTES)
    return false;
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), public_key.data()) == 0;
}

ExchangeKeyPair make_exchange_keypair() {
  ExchangeKeyPair kp;
  kp.public_key.resize(crypto_scalarmult_BYTES);
  kp.secret_key.resize(crypto_scalarmult_SCALARBYTES);
  randombytes_buf(kp.secret_key.data(), kp.secret_key.size());
  crypto_scalarmult_base(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

Bytes exchange_public_key(std::span<const std::uint8_t> secret) {
  if (secret.size() != crypto_scalarmult_SCALARBYTES)
    throw std::invalid_argument("bad exchange secret length");
  Bytes pub(crypto_scalarmult_BYTES);
  crypto_scalarmult_base(pub.data(), secret.data());
  return pub;
}

Bytes shared_secret(std::span<const std::uint8_t> my_secret,
                    std::span<const std::uint8_t> peer_public) {
  Bytes raw(crypto_scalarmult_BYTES);
  if (crypto_scalarmult(raw.data(), my_secret.data(), peer_public.data()) != 0)
    throw std::runtime_error("key exchange failed");
  // Hash the raw point so the secret is uniform.
  return sha256(raw);
}

namespace {
void counter_nonce(std::uint64_t counter, std::uint8_t out[crypto_aead_chacha20poly1305_ietf_NPUBBYTES]) {
  std::memset(out, 0, crypto_aead_chacha20poly1305_ietf_NPUBBYTES);
  for (int i = 0; i < 8; ++i)
    out[crypto_aead_chacha20poly1305_ietf_NPUBBYTES - 1 - i] =
        static_cast<std::uint8_t>(counter >> (8 * i));
}
}  // namespace

Bytes aead_seal(std::span<const std::uint8_t> key, std::uint64_t counter,
                std::span<const std::uint8_t> plaintext) {
  std::uint8_t nonce[crypto_aead_chacha20poly1305_ietf_NPUBBYTES];
  counter_nonce(counter, nonce);
  Bytes out(plaintext.size() + crypto_aead_chacha20poly1305_ietf_ABYTES);
  unsigned long long out_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &out_len, plaintext.data(),
                                            plaintext.size(), nullptr, 0, nullptr, nonce,
                                            key.data());
  out.resize(out_len);
  return out;
}

std::optional<Bytes> aead_open(std::span<const std::uint8_t> key, std::uint64_t counter,
                               std::span<const std::uint8_t> sealed) {
  if (sealed.size() < crypto_aead_chacha20poly1305_ietf_ABYTES) return std::nullopt;
  std::uint8_t nonce[crypto_aead_chacha20poly1305_ietf_NPUBBYTES];
  counter_nonce(counter, nonce);
  Bytes out(sealed.size() - crypto_aead_chacha20poly1305_ietf_ABYTES);
  unsigned long long out_len = 0;
  if (crypto_aead_chacha20poly1305_ietf_decrypt(out.data(), &out_len, nullptr, sealed.data(),
                                                sealed.size(), nullptr, 0, nonce,
                                                key.data()) != 0)
    return std::nullopt;
  out.resize(out_len);
  return out;
}

Bytes derive_key(std::span<const std::uint8_t> secret, std::string_view label,
                 std::span<const std::uint8_t> context) {
  Bytes msg;
  msg.reserve(label.size() + 1 + context.size());
  msg.insert(msg.end(), label.begin(), label.end());
  msg.push_back(0);
  msg.insert(msg.end(), context.begin(), context.end());
  return hmac_sha256(secret, msg);
}

}  // namespace confcore::crypto
