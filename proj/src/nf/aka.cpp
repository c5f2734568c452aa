#include "confcore/nf/aka.hpp"

#include "confcore/crypto.hpp"

namespace confcore::nf::aka {

Bytes encode_sqn(std::uint64_t sqn) {
  Bytes out(kSqnSize);
  for (std::size_t i = 0; i < kSqnSize; ++i)
    out[kSqnSize - 1 - i] = static_cast<std::uint8_t>(sqn >> (8 * i));
  return out;
}

std::uint64_t decode_sqn(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (auto byte : b) v = (v << 8) | byte;
  return v & kSqnMask;
}

namespace {
Bytes prf(std::span<const std::uint8_t> k, std::string_view label,
          std::span<const std::uint8_t> data, std::size_t out_len) {
  Bytes full = crypto::derive_key(k, label, data);
  full.resize(out_len);
  return full;
}
}  // namespace

Bytes f1(std::span<const std::uint8_t> k, std::uint64_t sqn,
         std::span<const std::uint8_t> amf_field, std::span<const std::uint8_t> rand) {
  Bytes data = encode_sqn(sqn);
  data.insert(data.end(), amf_field.begin(), amf_field.end());
  data.insert(data.end(), rand.begin(), rand.end());
  return prf(k, "f1", data, kMacSize);
}

Bytes f2(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand) {
  return prf(k, "f2", rand, kResSize);
}

Bytes f5(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand) {
  return prf(k, "f5", rand, kAkSize);
}

Bytes f1_star(std::span<const std::uint8_t> k, std::uint64_t ue_sqn,
              std::span<const std::uint8_t> rand) {
  Bytes data = encode_sqn(ue_sqn);
  data.insert(data.end(), rand.begin(), rand.end());
  return prf(k, "f1s", data, kMacSize);
}

Bytes derive_kausf(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand,
                   std::uint64_t sqn) {
  Bytes data(rand.begin(), rand.end());
  Bytes sqn_bytes = encode_sqn(sqn);
  data.insert(data.end(), sqn_bytes.begin(), sqn_bytes.end());
  return crypto::derive_key(k, "kausf", data);
}

Bytes derive_kseaf(std::span<const std::uint8_t> kausf, std::string_view serving_network) {
  return crypto::derive_key(kausf, "kseaf", to_bytes(serving_network));
}

AuthVector generate_vector(std::span<const std::uint8_t> k, std::uint64_t sqn,
                           std::span<const std::uint8_t> rand) {
  AuthVector v;
  v.rand.assign(rand.begin(), rand.end());
  Bytes ak = f5(k, rand);
  Bytes sqn_bytes = encode_sqn(sqn);
  Bytes masked(kSqnSize);
  for (std::size_t i = 0; i < kSqnSize; ++i) masked[i] = sqn_bytes[i] ^ ak[i];
  Bytes mac_a = f1(k, sqn, Bytes{kAmfField[0], kAmfField[1]}, rand);
  v.autn = masked;
  v.autn.push_back(kAmfField[0]);
  v.autn.push_back(kAmfField[1]);
  v.autn.insert(v.autn.end(), mac_a.begin(), mac_a.end());
  v.xres_star = f2(k, rand);
  v.k_ausf = derive_kausf(k, rand, sqn);
  return v;
}

}  // namespace confcore::nf::aka
