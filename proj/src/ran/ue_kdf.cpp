#include "confcore/ran/ransim.hpp"

namespace confcore::ran::uekdf {

// HMAC-SHA256 built directly from the hash (RFC 2104 ipad/opad construction),
// independent of the network side's library HMAC.
Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  constexpr std::size_t kBlock = 64;
  Bytes k0(key.begin(), key.end());
  if (k0.size() > kBlock) k0 = crypto::sha256(k0);
  k0.resize(kBlock, 0);

  Bytes inner(kBlock);
  Bytes outer(kBlock);
  for (std::size_t i = 0; i < kBlock; ++i) {
    inner[i] = k0[i] ^ 0x36;
    outer[i] = k0[i] ^ 0x5C;
  }
  inner.insert(inner.end(), data.begin(), data.end());
  Bytes inner_hash = crypto::sha256(inner);
  outer.insert(outer.end(), inner_hash.begin(), inner_hash.end());
  return crypto::sha256(outer);
}

namespace {
Bytes labelled(std::span<const std::uint8_t> k, std::string_view label,
               std::span<const std::uint8_t> data, std::size_t out_len) {
  Bytes msg;
  msg.insert(msg.end(), label.begin(), label.end());
  msg.push_back(0);
  msg.insert(msg.end(), data.begin(), data.end());
  Bytes full = hmac_sha256(k, msg);
  full.resize(out_len);
  return full;
}

Bytes sqn_bytes(std::uint64_t sqn) {
  Bytes out(6);
  for (int i = 0; i < 6; ++i) out[5 - i] = static_cast<std::uint8_t>(sqn >> (8 * i));
  return out;
}
}  // namespace

Bytes res(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand) {
  return labelled(k, "f2", rand, 16);
}

Bytes ak(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand) {
  return labelled(k, "f5", rand, 6);
}

Bytes mac_a(std::span<const std::uint8_t> k, std::uint64_t sqn,
            std::span<const std::uint8_t> amf_field, std::span<const std::uint8_t> rand) {
  Bytes data = sqn_bytes(sqn);
  data.insert(data.end(), amf_field.begin(), amf_field.end());
  data.insert(data.end(), rand.begin(), rand.end());
  return labelled(k, "f1", data, 8);
}

Bytes mac_s(std::span<const std::uint8_t> k, std::uint64_t ue_sqn,
            std::span<const std::uint8_t> rand) {
  Bytes data = sqn_bytes(ue_sqn);
  data.insert(data.end(), rand.begin(), rand.end());
  return labelled(k, "f1s", data, 8);
}

Bytes kausf(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand,
            std::uint64_t sqn) {
  Bytes data(rand.begin(), rand.end());
  Bytes sb = sqn_bytes(sqn);
  data.insert(data.end(), sb.begin(), sb.end());
  return labelled(k, "kausf", data, 32);
}

Bytes kseaf(std::span<const std::uint8_t> kausf_key, std::string_view serving_network) {
  return labelled(kausf_key, "kseaf", to_bytes(serving_network), 32);
}

}  // namespace confcore::ran::uekdf
