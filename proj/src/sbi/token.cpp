#include "confcore/sbi/token.hpp"

#include <algorithm>

#include "confcore/crypto.hpp"

namespace confcore::sbi {

namespace {
void put_str(Bytes& out, std::string_view s) {
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}
std::string take_str(ByteReader& r) {
  auto b = r.take(r.u16());
  return to_string(b);
}
}  // namespace

Bytes AccessToken::signing_input() const {
  Bytes out;
  put_str(out, subject);
  put_str(out, audience);
  put_u16(out, static_cast<std::uint16_t>(scope.size()));
  for (const auto& s : scope) put_str(out, s);
  put_u64(out, static_cast<std::uint64_t>(issued_at));
  put_u64(out, static_cast<std::uint64_t>(expires_at));
  return out;
}

Bytes AccessToken::serialize() const {
  Bytes out = signing_input();
  put_u16(out, static_cast<std::uint16_t>(signature.size()));
  out.insert(out.end(), signature.begin(), signature.end());
  return out;
}

AccessToken AccessToken::parse(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  AccessToken tok;
  tok.subject = take_str(r);
  tok.audience = take_str(r);
  std::size_t n = r.u16();
  tok.scope.reserve(n);
  for (std::size_t i = 0; i < n; ++i) tok.scope.push_back(take_str(r));
  tok.issued_at = static_cast<TimeMs>(r.u64());
  tok.expires_at = static_cast<TimeMs>(r.u64());
  tok.signature = r.take(r.u16());
  if (!r.done()) throw std::invalid_argument("trailing bytes in token");
  return tok;
}

AccessToken issue_token(std::string subject, std::string audience,
                        std::vector<std::string> scope, TimeMs issued_at, TimeMs expires_at,
                        std::span<const std::uint8_t> signing_key) {
  AccessToken tok;
  tok.subject = std::move(subject);
  tok.audience = std::move(audience);
  tok.scope = std::move(scope);
  tok.issued_at = issued_at;
  tok.expires_at = expires_at;
  tok.signature = crypto::sign(tok.signing_input(), signing_key);
  return tok;
}

const char* token_reject_name(TokenReject r) {
  switch (r) {
    case TokenReject::None: return "accepted";
    case TokenReject::Malformed: return "malformed";
    case TokenReject::Signature: return "signature";
    case TokenReject::Expired: return "expired";
    case TokenReject::Scope: return "scope";
    case TokenReject::Audience: return "audience";
  }
  return "?";
}

TokenReject verify_token(const AccessToken& tok, std::string_view required_scope,
                         std::string_view producer_type,
                         std::span<const std::uint8_t> nrf_pubkey, TimeMs now) {
  if (!crypto::verify_signature(tok.signing_input(), tok.signature, nrf_pubkey))
    return TokenReject::Signature;
  if (now >= tok.expires_at) return TokenReject::Expired;
  if (std::find(tok.scope.begin(), tok.scope.end(), required_scope) == tok.scope.end())
    return TokenReject::Scope;
  if (tok.audience != producer_type) return TokenReject::Audience;
  return TokenReject::None;
}

TokenReject verify_token_bytes(std::span<const std::uint8_t> token_bytes,
                               std::string_view required_scope, std::string_view producer_type,
                               std::span<const std::uint8_t> nrf_pubkey, TimeMs now) {
  if (token_bytes.empty()) return TokenReject::Malformed;
  AccessToken tok;
  try {
    tok = AccessToken::parse(token_bytes);
  } catch (const std::exception&) {
    return TokenReject::Malformed;
  }
  return verify_token(tok, required_scope, producer_type, nrf_pubkey, now);
}

}  // namespace confcore::sbi
