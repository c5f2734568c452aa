#include "confcore/sbi/message.hpp"

namespace confcore::sbi {

namespace {
constexpr std::uint8_t kFlagEncrypted = 0x01;
constexpr std::uint8_t kFlagResponse = 0x02;
constexpr std::uint8_t kMethodShift = 4;
constexpr std::uint8_t kMethodMask = 0x70;

std::uint8_t make_flags(const SbiMessage& msg, bool encrypted) {
  std::uint8_t flags = 0;
  if (encrypted) flags |= kFlagEncrypted;
  if (msg.is_response) flags |= kFlagResponse;
  flags |= static_cast<std::uint8_t>(static_cast<std::uint8_t>(msg.method) << kMethodShift);
  return flags;
}

Bytes encode_header(const SbiMessage& msg, bool encrypted) {
  Bytes out;
  out.reserve(kFrameHeaderSize);
  put_u16(out, kFrameMagic);
  out.push_back(kFrameVersion);
  out.push_back(make_flags(msg, encrypted));
  put_u64(out, msg.request_id);
  return out;
}

Bytes encode_tail(const SbiMessage& msg) {
  Bytes out;
  put_u16(out, static_cast<std::uint16_t>(msg.service.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.path.size()));
  put_u16(out, static_cast<std::uint16_t>(msg.token.size()));
  put_u32(out, static_cast<std::uint32_t>(msg.body.size()));
  out.insert(out.end(), msg.service.begin(), msg.service.end());
  out.insert(out.end(), msg.path.begin(), msg.path.end());
  out.insert(out.end(), msg.token.begin(), msg.token.end());
  out.insert(out.end(), msg.body.begin(), msg.body.end());
  return out;
}

struct Header {
  std::uint8_t flags;
  std::uint64_t request_id;
};

Header decode_header(ByteReader& r) {
  if (r.u16() != kFrameMagic) throw std::invalid_argument("bad frame magic");
  if (r.u8() != kFrameVersion) throw std::invalid_argument("unsupported frame version");
  Header h;
  h.flags = r.u8();
  h.request_id = r.u64();
  return h;
}

void decode_tail(ByteReader& r, SbiMessage& msg) {
  std::size_t service_len = r.u16();
  std::size_t path_len = r.u16();
  std::size_t token_len = r.u16();
  std::size_t body_len = r.u32();
  msg.service = to_string(r.take(service_len));
  msg.path = to_string(r.take(path_len));
  msg.token = r.take(token_len);
  msg.body = r.take(body_len);
  if (!r.done()) throw std::invalid_argument("trailing bytes in frame");
}

void apply_flags(SbiMessage& msg, std::uint8_t flags) {
  msg.is_response = (flags & kFlagResponse) != 0;
  msg.method = static_cast<Method>((flags & kMethodMask) >> kMethodShift);
}
}  // namespace

Bytes encode_frame(const SbiMessage& msg) {
  Bytes out = encode_header(msg, /*encrypted=*/false);
  Bytes tail = encode_tail(msg);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

SbiMessage decode_frame(std::span<const std::uint8_t> frame) {
  ByteReader r(frame);
  Header h = decode_header(r);
  if (h.flags & kFlagEncrypted) throw std::invalid_argument("encrypted frame");
  SbiMessage msg;
  msg.request_id = h.request_id;
  apply_flags(msg, h.flags);
  decode_tail(r, msg);
  return msg;
}

Bytes encode_frame_encrypted(const SbiMessage& msg,
                             const std::function<Bytes(const Bytes&)>& seal) {
  Bytes out = encode_header(msg, /*encrypted=*/true);
  Bytes sealed = seal(encode_tail(msg));
  out.insert(out.end(), sealed.begin(), sealed.end());
  return out;
}

bool frame_is_encrypted(std::span<const std::uint8_t> frame) {
  if (frame.size() < kFrameHeaderSize) throw std::invalid_argument("short frame");
  return (frame[3] & kFlagEncrypted) != 0;
}

std::uint64_t frame_request_id(std::span<const std::uint8_t> frame) {
  ByteReader r(frame);
  r.take(4);
  return r.u64();
}

SbiMessage decode_frame_encrypted(std::span<const std::uint8_t> frame,
                                  const std::function<std::optional<Bytes>(const Bytes&)>& open) {
  ByteReader r(frame);
  Header h = decode_header(r);
  if (!(h.flags & kFlagEncrypted)) throw std::invalid_argument("cleartext frame");
  Bytes sealed = r.take(r.remaining());
  auto tail = open(sealed);
  if (!tail) throw std::invalid_argument("frame authentication failed");
  SbiMessage msg;
  msg.request_id = h.request_id;
  apply_flags(msg, h.flags);
  ByteReader tr(*tail);
  decode_tail(tr, msg);
  return msg;
}

}  // namespace confcore::sbi
