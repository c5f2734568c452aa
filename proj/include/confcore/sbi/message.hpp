#pragma once

#include <functional>
#include <optional>
#include <string>

#include "confcore/common.hpp"

namespace confcore::sbi {

enum class Method : std::uint8_t { Get = 0, Post = 1, Put = 2, Delete = 3 };

struct SbiMessage {
  std::uint64_t request_id = 0;
  Method method = Method::Get;
  bool is_response = false;
  std::string service;
  std::string path;
  Bytes token;  // serialized AccessToken; empty when absent
  Bytes body;
  TimeMs timestamp = 0;  // stamped locally, not carried on the wire
};

// Frame layout:
//   magic 0x5A54 (2B) | version u8 | flags u8 | request_id u64 BE |
//   u16 service_len | u16 path_len | u16 token_len | u32 body_len |
//   service | path | token | body
// flags: bit0 = encrypted, bit1 = response, bits 4..6 = method.
// Encrypted frames keep the 12-byte header in the clear and seal everything after it.
inline constexpr std::uint16_t kFrameMagic = 0x5A54;
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 12;

Bytes encode_frame(const SbiMessage& msg);
SbiMessage decode_frame(std::span<const std::uint8_t> frame);  // throws on malformed input

/// Encrypted variant: `seal` maps the plaintext tail to its sealed form (and back).
Bytes encode_frame_encrypted(const SbiMessage& msg,
                             const std::function<Bytes(const Bytes&)>& seal);
bool frame_is_encrypted(std::span<const std::uint8_t> frame);
std::uint64_t frame_request_id(std::span<const std::uint8_t> frame);
/// Re-assembles a cleartext frame from a decrypted tail for decode_frame().
SbiMessage decode_frame_encrypted(std::span<const std::uint8_t> frame,
                                  const std::function<std::optional<Bytes>(const Bytes&)>& open);

}  // namespace confcore::sbi
