#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confcore/sbi/channel.hpp"

using namespace confcore;

namespace {

sbi::SbiMessage sample_message() {
  sbi::SbiMessage msg;
  msg.request_id = 0x0102030405060708ULL;
  msg.method = sbi::Method::Post;
  msg.service = "nnrf-disc";
  msg.path = "discover";
  msg.token = {0xAA, 0xBB};
  msg.body = {0x01, 0x02, 0x03};
  return msg;
}

struct EchoServer {
  SimClock clock;
  sbi::Transport transport;
  sbi::ReportStore reports;
  std::shared_ptr<sbi::ServerEndpoint> endpoint;
  crypto::ExchangeKeyPair kp;

  explicit EchoServer(const std::string& address = "srv") {
    kp = crypto::make_exchange_keypair();
    endpoint = std::make_shared<sbi::ServerEndpoint>("srv-1", "UDM", &clock);
    endpoint->set_channel_keypair(kp);
    endpoint->add_handler("echo", "echo", [](const sbi::SbiMessage& req) {
      sbi::SbiMessage resp;
      resp.service = req.service;
      resp.path = req.path;
      resp.body = req.body;
      return resp;
    });
    transport.bind(address, endpoint);
    reports.put(address, sbi::ReportStore::Entry{"srv-1", kp.public_key});
  }

  sbi::Channel open(sbi::ChannelMode mode, const std::string& address = "srv") {
    sbi::ChannelIdentity id{"client", {}, mode == sbi::ChannelMode::Attested};
    return sbi::open_channel(id, transport, address, mode, reports, clock);
  }
};

}  // namespace

TEST_CASE("frame encoding matches the pinned bit-exact layout") {
  sbi::SbiMessage msg = sample_message();
  Bytes frame = sbi::encode_frame(msg);

  // Independent assembly of the expected bytes, straight from the layout.
  Bytes expected;
  expected.push_back(0x5A);
  expected.push_back(0x54);
  expected.push_back(0x01);              // version
  expected.push_back(0x10);              // flags: method Post (1) << 4, not encrypted
  for (int i = 1; i <= 8; ++i) expected.push_back(static_cast<std::uint8_t>(i));
  auto push_u16 = [&](std::uint16_t v) {
    expected.push_back(static_cast<std::uint8_t>(v >> 8));
    expected.push_back(static_cast<std::uint8_t>(v));
  };
  push_u16(9);   // service len
  push_u16(8);   // path len
  push_u16(2);   // token len
  expected.push_back(0);
  expected.push_back(0);
  expected.push_back(0);
  expected.push_back(3);  // body len u32
  for (char c : std::string("nnrf-disc")) expected.push_back(c);
  for (char c : std::string("discover")) expected.push_back(c);
  expected.push_back(0xAA);
  expected.push_back(0xBB);
  expected.insert(expected.end(), {0x01, 0x02, 0x03});

  CHECK(frame == expected);
  CHECK(frame.size() == sbi::kFrameHeaderSize + 10 + 9 + 8 + 2 + 3);
  CHECK_FALSE(sbi::frame_is_encrypted(frame));
  CHECK(sbi::frame_request_id(frame) == msg.request_id);
}

TEST_CASE("frame round-trip and malformed input rejection") {
  sbi::SbiMessage msg = sample_message();
  msg.is_response = true;
  Bytes frame = sbi::encode_frame(msg);
  sbi::SbiMessage back = sbi::decode_frame(frame);
  CHECK(back.request_id == msg.request_id);
  CHECK(back.method == msg.method);
  CHECK(back.is_response);
  CHECK(back.service == msg.service);
  CHECK(back.path == msg.path);
  CHECK(back.token == msg.token);
  CHECK(back.body == msg.body);

  Bytes bad_magic = frame;
  bad_magic[0] ^= 0xFF;
  CHECK_THROWS_AS(sbi::decode_frame(bad_magic), std::invalid_argument);

  Bytes truncated(frame.begin(), frame.end() - 1);
  CHECK_THROWS_AS(sbi::decode_frame(truncated), std::out_of_range);

  Bytes trailing = frame;
  trailing.push_back(0);
  CHECK_THROWS_AS(sbi::decode_frame(trailing), std::invalid_argument);

  Bytes enc_flag = frame;
  enc_flag[3] |= 0x01;
  CHECK_THROWS_AS(sbi::decode_frame(enc_flag), std::invalid_argument);
}

TEST_CASE("token verification matrix") {
  auto kp = crypto::make_signing_keypair();
  sbi::AccessToken tok =
      sbi::issue_token("amf-1", "UDM", {"nudm-sdm"}, 1000, 2000, kp.secret_key);

  CHECK(sbi::verify_token(tok, "nudm-sdm", "UDM", kp.public_key, 1500) ==
        sbi::TokenReject::None);
  CHECK(sbi::verify_token(tok, "nausf-auth", "UDM", kp.public_key, 1500) ==
        sbi::TokenReject::Scope);
  CHECK(sbi::verify_token(tok, "nudm-sdm", "AUSF", kp.public_key, 1500) ==
        sbi::TokenReject::Audience);
  CHECK(sbi::verify_token(tok, "nudm-sdm", "UDM", kp.public_key, 2000) ==
        sbi::TokenReject::Expired);

  auto other = crypto::make_signing_keypair();
  CHECK(sbi::verify_token(tok, "nudm-sdm", "UDM", other.public_key, 1500) ==
        sbi::TokenReject::Signature);

  // Expiry is monotone: once rejected for expiry, rejected at every later time.
  for (TimeMs t = 2000; t < 2100; ++t)
    CHECK(sbi::verify_token(tok, "nudm-sdm", "UDM", kp.public_key, t) ==
          sbi::TokenReject::Expired);
}

TEST_CASE("token field mutation is exhaustive: every field flip rejects") {
  auto kp = crypto::make_signing_keypair();
  sbi::AccessToken tok =
      sbi::issue_token("amf-1", "UDM", {"nudm-sdm", "nudm-ueau"}, 1000, 2000, kp.secret_key);
  auto verify = [&](const sbi::AccessToken& t) {
    return sbi::verify_token(t, "nudm-sdm", "UDM", kp.public_key, 1500);
  };
  REQUIRE(verify(tok) == sbi::TokenReject::None);

  sbi::AccessToken m = tok;
  m.subject = "rogue";
  CHECK(verify(m) == sbi::TokenReject::Signature);
  m = tok;
  m.audience = "AUSF";  // altered after signing: signature breaks first
  CHECK(verify(m) == sbi::TokenReject::Signature);
  m = tok;
  m.scope = {"nnrf-nfm"};
  CHECK(verify(m) == sbi::TokenReject::Signature);
  m = tok;
  m.issued_at += 1;
  CHECK(verify(m) == sbi::TokenReject::Signature);
  m = tok;
  m.expires_at += 100'000;
  CHECK(verify(m) == sbi::TokenReject::Signature);
  m = tok;
  m.signature[0] ^= 0x01;
  CHECK(verify(m) == sbi::TokenReject::Signature);
}

TEST_CASE("token serialize/parse round trip") {
  auto kp = crypto::make_signing_keypair();
  sbi::AccessToken tok =
      sbi::issue_token("smf-2", "NRF", {"nnrf-disc", "nnrf-nfm"}, 5, 77, kp.secret_key);
  sbi::AccessToken back = sbi::AccessToken::parse(tok.serialize());
  CHECK(back.subject == tok.subject);
  CHECK(back.audience == tok.audience);
  CHECK(back.scope == tok.scope);
  CHECK(back.issued_at == tok.issued_at);
  CHECK(back.expires_at == tok.expires_at);
  CHECK(back.signature == tok.signature);

  Bytes trailing = tok.serialize();
  trailing.push_back(0);
  CHECK_THROWS_AS(sbi::AccessToken::parse(trailing), std::invalid_argument);
  CHECK(sbi::verify_token_bytes({}, "x", "y", kp.public_key, 0) ==
        sbi::TokenReject::Malformed);
}

TEST_CASE("attested channel opens only with a verified report") {
  EchoServer srv;
  sbi::Channel ch = srv.open(sbi::ChannelMode::Attested);
  CHECK(ch.attested());

  srv.reports.erase("srv");
  CHECK_THROWS_WITH_AS(srv.open(sbi::ChannelMode::Attested),
                       doctest::Contains("no verified report"), sbi::SbiError);
}

TEST_CASE("key substitution fails confirmation") {
  EchoServer srv;
  // Report store claims a different key than the endpoint actually holds.
  auto rogue = crypto::make_exchange_keypair();
  srv.reports.put("srv", sbi::ReportStore::Entry{"srv-1", rogue.public_key});
  try {
    srv.open(sbi::ChannelMode::Attested);
    FAIL("handshake should not succeed");
  } catch (const sbi::SbiError& e) {
    CHECK(e.code() == sbi::SbiErrorCode::HandshakeFailure);
  }
}

TEST_CASE("attested round trip: 1000 random payloads decrypt to the original") {
  EchoServer srv;
  sbi::Channel ch = srv.open(sbi::ChannelMode::Attested);
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    sbi::SbiMessage msg;
    msg.method = sbi::Method::Post;
    msg.service = "echo";
    msg.path = "echo";
    msg.body = rng.next_bytes(1 + rng.next_below(1024));
    Bytes sent = msg.body;
    sbi::SbiMessage resp = ch.send_request(std::move(msg));
    CHECK(resp.body == sent);
    CHECK(resp.is_response);
  }
}

TEST_CASE("single-bit ciphertext mutation yields IntegrityFailure (100 positions)") {
  EchoServer srv;
  Rng rng(7);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    sbi::Channel ch = srv.open(sbi::ChannelMode::Attested);
    sbi::SbiMessage msg;
    msg.service = "echo";
    msg.path = "echo";
    msg.body = rng.next_bytes(256);
    Bytes frame = ch.encode_request(std::move(msg));
    std::size_t pos =
        sbi::kFrameHeaderSize + rng.next_below(frame.size() - sbi::kFrameHeaderSize);
    frame[pos] ^= static_cast<std::uint8_t>(1u << rng.next_below(8));
    try {
      ch.deliver_raw(frame);
    } catch (const sbi::SbiError& e) {
      if (e.code() == sbi::SbiErrorCode::IntegrityFailure) ++failures;
    }
  }
  CHECK(failures == 100);
}

TEST_CASE("tampered channel is closed after an integrity failure") {
  EchoServer srv;
  sbi::Channel ch = srv.open(sbi::ChannelMode::Attested);
  sbi::SbiMessage msg;
  msg.service = "echo";
  msg.path = "echo";
  msg.body = {1, 2, 3};
  Bytes frame = ch.encode_request(std::move(msg));
  frame.back() ^= 0x01;
  CHECK_THROWS_AS(ch.deliver_raw(frame), sbi::SbiError);
  sbi::SbiMessage retry;
  retry.service = "echo";
  retry.path = "echo";
  try {
    ch.send_request(std::move(retry));
    FAIL("closed connection must reject further frames");
  } catch (const sbi::SbiError& e) {
    CHECK(e.code() == sbi::SbiErrorCode::ChannelClosed);
  }
}

TEST_CASE("cleartext frame on an attested connection is rejected") {
  EchoServer srv;
  sbi::Channel ch = srv.open(sbi::ChannelMode::Attested);
  sbi::SbiMessage msg;
  msg.request_id = 1;
  msg.service = "echo";
  msg.path = "echo";
  Bytes plain_frame = sbi::encode_frame(msg);
  try {
    ch.deliver_raw(plain_frame);
    FAIL("cleartext must not pass");
  } catch (const sbi::SbiError& e) {
    CHECK(e.code() == sbi::SbiErrorCode::IntegrityFailure);
  }
}

TEST_CASE("token-protected dispatch never executes without an accepted token") {
  EchoServer srv;
  auto nrf_kp = crypto::make_signing_keypair();
  srv.endpoint->set_token_key(nrf_kp.public_key);
  int executions = 0;
  srv.endpoint->add_handler(
      "guarded", "op",
      [&](const sbi::SbiMessage& req) {
        ++executions;
        sbi::SbiMessage resp;
        resp.body = req.body;
        return resp;
      },
      "guarded");
  srv.clock.set(1000);

  sbi::Channel ch = srv.open(sbi::ChannelMode::Attested);
  auto request = [&](Bytes token) {
    sbi::SbiMessage msg;
    msg.service = "guarded";
    msg.path = "op";
    msg.token = std::move(token);
    return ch.send_request(std::move(msg));
  };

  sbi::AccessToken good =
      sbi::issue_token("client", "UDM", {"guarded"}, 1000, 2000, nrf_kp.secret_key);
  CHECK_NOTHROW(request(good.serialize()));

  sbi::AccessToken expired =
      sbi::issue_token("client", "UDM", {"guarded"}, 0, 900, nrf_kp.secret_key);
  CHECK_THROWS_AS(request(expired.serialize()), sbi::SbiError);
  CHECK_THROWS_AS(request({}), sbi::SbiError);
  sbi::AccessToken wrong_scope =
      sbi::issue_token("client", "UDM", {"other"}, 1000, 2000, nrf_kp.secret_key);
  CHECK_THROWS_AS(request(wrong_scope.serialize()), sbi::SbiError);

  // Interception counter: every protected execution had an accepted token.
  CHECK(executions == 1);
  CHECK(srv.endpoint->protected_invocations() == srv.endpoint->token_accepts());
  CHECK(srv.endpoint->token_accepts() == 1);
}

TEST_CASE("plain channel round trip and request correlation") {
  EchoServer srv;
  sbi::Channel ch = srv.open(sbi::ChannelMode::Plain);
  CHECK_FALSE(ch.attested());
  for (int i = 0; i < 5; ++i) {
    sbi::SbiMessage msg;
    msg.service = "echo";
    msg.path = "echo";
    msg.body = {static_cast<std::uint8_t>(i)};
    sbi::SbiMessage resp = ch.send_request(std::move(msg));
    CHECK(resp.request_id == static_cast<std::uint64_t>(i + 1));
    CHECK(resp.body == Bytes{static_cast<std::uint8_t>(i)});
  }
  CHECK_THROWS_AS(srv.open(sbi::ChannelMode::Plain, "nowhere"), sbi::SbiError);
}
