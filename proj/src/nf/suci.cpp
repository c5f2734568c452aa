#include "confcore/nf/suci.hpp"

namespace confcore::nf {

Bytes Suci::serialize() const {
  Bytes out;
  out.push_back(scheme_id);
  put_u16(out, static_cast<std::uint16_t>(home_pubkey_id.size()));
  out.insert(out.end(), home_pubkey_id.begin(), home_pubkey_id.end());
  put_u16(out, static_cast<std::uint16_t>(ephemeral_pubkey.size()));
  out.insert(out.end(), ephemeral_pubkey.begin(), ephemeral_pubkey.end());
  put_u16(out, static_cast<std::uint16_t>(ciphertext.size()));
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  put_u16(out, static_cast<std::uint16_t>(mac.size()));
  out.insert(out.end(), mac.begin(), mac.end());
  return out;
}

Suci Suci::parse(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  Suci s;
  s.scheme_id = r.u8();
  s.home_pubkey_id = to_string(r.take(r.u16()));
  s.ephemeral_pubkey = r.take(r.u16());
  s.ciphertext = r.take(r.u16());
  s.mac = r.take(r.u16());
  if (!r.done()) throw std::invalid_argument("trailing bytes in suci");
  return s;
}

Suci conceal_supi(std::string_view supi, const std::string& home_pubkey_id,
                  std::span<const std::uint8_t> home_pubkey) {
  auto eph = crypto::make_exchange_keypair();
  Bytes shared = crypto::shared_secret(eph.secret_key, home_pubkey);
  Bytes key = crypto::derive_key(shared, "suci", eph.public_key);
  Bytes sealed = crypto::aead_seal(key, 0, to_bytes(supi));
  Suci s;
  s.home_pubkey_id = home_pubkey_id;
  s.ephemeral_pubkey = eph.public_key;
  s.ciphertext.assign(sealed.begin(), sealed.end() - crypto::kAeadTagSize);
  s.mac.assign(sealed.end() - crypto::kAeadTagSize, sealed.end());
  return s;
}

DeconcealResult deconceal_supi(const Suci& suci, const std::string& expected_key_id,
                               std::span<const std::uint8_t> home_privkey) {
  if (suci.home_pubkey_id != expected_key_id) return {DeconcealError::UnknownKeyId, {}};
  if (suci.ephemeral_pubkey.size() != 32 || suci.mac.size() != crypto::kAeadTagSize)
    return {DeconcealError::MacFailure, {}};
  Bytes shared = crypto::shared_secret(home_privkey, suci.ephemeral_pubkey);
  Bytes key = crypto::derive_key(shared, "suci", suci.ephemeral_pubkey);
  Bytes sealed = suci.ciphertext;
  sealed.insert(sealed.end(), suci.mac.begin(), suci.mac.end());
  auto plain = crypto::aead_open(key, 0, sealed);
  if (!plain) return {DeconcealError::MacFailure, {}};
  return {DeconcealError::None, to_string(*plain)};
}

}  // namespace confcore::nf
