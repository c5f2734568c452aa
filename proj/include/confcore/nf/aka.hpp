#pragma once

#include "confcore/common.hpp"

namespace confcore::nf::aka {

// Network-side authentication derivations: a keyed PRF family with
// domain-separation labels ("f1".."f5", "kausf", "kseaf") over HMAC-SHA256.
// Sequence numbers are 48-bit, carried in the low 6 bytes of a u64.

inline constexpr std::size_t kKeySize = 16;
inline constexpr std::size_t kRandSize = 16;
inline constexpr std::size_t kSqnSize = 6;
inline constexpr std::size_t kMacSize = 8;
inline constexpr std::size_t kAkSize = 6;
inline constexpr std::size_t kResSize = 16;
inline constexpr std::uint64_t kSqnMask = 0xFFFFFFFFFFFFULL;
inline constexpr std::uint64_t kResyncWindow = 32;

Bytes encode_sqn(std::uint64_t sqn);
std::uint64_t decode_sqn(std::span<const std::uint8_t> b);

/// mac_a: authenticates (sqn, amf_field, rand) under k.
Bytes f1(std::span<const std::uint8_t> k, std::uint64_t sqn,
         std::span<const std::uint8_t> amf_field, std::span<const std::uint8_t> rand);
/// res: the expected challenge response.
Bytes f2(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand);
/// ak: the anonymity key masking sqn in autn.
Bytes f5(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand);
/// mac_s: authenticates the UE's sqn in a resync message.
Bytes f1_star(std::span<const std::uint8_t> k, std::uint64_t ue_sqn,
              std::span<const std::uint8_t> rand);

Bytes derive_kausf(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand,
                   std::uint64_t sqn);
Bytes derive_kseaf(std::span<const std::uint8_t> kausf, std::string_view serving_network);

struct AuthVector {
  Bytes rand;       // 16B challenge
  Bytes autn;       // (sqn xor ak) || amf_field || mac_a = 16B
  Bytes xres_star;  // expected response
  Bytes k_ausf;
};

inline constexpr std::uint8_t kAmfField[2] = {0x80, 0x00};

AuthVector generate_vector(std::span<const std::uint8_t> k, std::uint64_t sqn,
                           std::span<const std::uint8_t> rand);

}  // namespace confcore::nf::aka
