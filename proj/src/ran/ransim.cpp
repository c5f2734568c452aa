#include "confcore/ran/ransim.hpp"

#include <chrono>
#include <cmath>

#include "confcore/nf/aka.hpp"

namespace confcore::ran {

nf::UeResponse SimUe::respond_challenge(const nf::UeChallenge& challenge) {
  nf::UeResponse out;
  if (challenge.autn.size() != 16) {
    last_mac_valid = false;
    return out;
  }
  Bytes anonymity = uekdf::ak(k, challenge.rand);
  Bytes masked(challenge.autn.begin(), challenge.autn.begin() + 6);
  for (int i = 0; i < 6; ++i) masked[i] ^= anonymity[i];
  std::uint64_t net_sqn = 0;
  for (auto b : masked) net_sqn = (net_sqn << 8) | b;
  Bytes amf_field(challenge.autn.begin() + 6, challenge.autn.begin() + 8);
  Bytes mac(challenge.autn.begin() + 8, challenge.autn.end());

  last_mac_valid = (uekdf::mac_a(k, net_sqn, amf_field, challenge.rand) == mac);

  // Freshness: the network's sequence number must move forward, but not jump
  // past the resync window.
  if (last_mac_valid &&
      !(net_sqn > sqn && net_sqn - sqn <= nf::aka::kResyncWindow)) {
    out.sync_failure = true;
    out.ue_sqn = sqn;
    out.auts_mac = uekdf::mac_s(k, sqn, challenge.rand);
    return out;
  }

  out.res = uekdf::res(k, challenge.rand);
  if (last_mac_valid) sqn = net_sqn;
  return out;
}

nf::Suci SimUe::conceal(const std::string& home_key_id,
                        std::span<const std::uint8_t> home_pubkey) const {
  return nf::conceal_supi(supi, home_key_id, home_pubkey);
}

UePopulation UePopulation::spawn(std::size_t n, std::uint64_t seed) {
  UePopulation pop;
  for (const auto& rec : nf::generate_subscribers(n, seed)) {
    SimUe ue;
    ue.supi = rec.supi;
    ue.k = rec.k;
    ue.sqn = rec.sqn;
    pop.ues.push_back(std::move(ue));
  }
  return pop;
}

void UePopulation::crosscheck(const nf::Udm& udm) const {
  for (const auto& ue : ues) {
    auto rec = udm.find_subscriber(ue.supi);
    if (!rec || rec->k != ue.k || rec->sqn != ue.sqn)
      throw RanError("SeedMismatch", "population diverges from UDM at " + ue.supi);
  }
}

std::vector<UeTimingRecord> registration_storm(UePopulation& population, nf::Amf& amf,
                                               const nf::Udm& udm,
                                               const StormOptions& options) {
  std::vector<UeTimingRecord> records;
  records.reserve(population.ues.size() * options.trials);
  Rng rng(options.seed);

  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    for (auto& ue : population.ues) {
      if (options.arrival == ArrivalModel::Poisson) {
        // Inverse-transform exponential inter-arrival; recorded, not slept,
        // since dispatch is sequential in deterministic mode.
        (void)(-std::log(1.0 - rng.next_unit()) / options.poisson_rate_per_s);
      }
      ue.state = UeState::Registering;
      auto start = std::chrono::steady_clock::now();
      nf::Suci suci = ue.conceal(udm.home_key_id(), udm.home_pubkey());
      nf::RegistrationResult result = amf.ue_register(
          suci, [&ue](const nf::UeChallenge& c) { return ue.respond_challenge(c); });
      auto end = std::chrono::steady_clock::now();

      UeTimingRecord rec;
      rec.supi = ue.supi;
      rec.trial = trial;
      rec.success = result.success;
      rec.failed_stage = result.failed_stage;
      rec.stage_ms = result.stage_ms;
      rec.total_ms = std::chrono::duration<double, std::milli>(end - start).count();
      records.push_back(std::move(rec));

      if (result.success) {
        ue.state = UeState::Registered;
        ue.session_id = result.session_id;
      } else {
        ue.state = UeState::Failed;
      }
    }
  }
  return records;
}

ThroughputRecord traffic_session(const SimUe& ue, sbi::Transport& transport,
                                 const std::string& upf_address, double bytes_per_s,
                                 double duration_s, const Clock& clock,
                                 std::size_t chunk_bytes) {
  if (ue.state != UeState::Registered || ue.session_id.empty())
    throw RanError("SessionMissing", "ue " + ue.supi + " has no established session");

  sbi::ReportStore empty_reports;  // user plane runs over plain channels
  sbi::ChannelIdentity id{ue.supi, {}, false};
  sbi::Channel ch =
      sbi::open_channel(id, transport, upf_address, sbi::ChannelMode::Plain, empty_reports,
                        clock);

  std::uint64_t total = static_cast<std::uint64_t>(bytes_per_s * duration_s);
  ThroughputRecord rec;
  rec.duration_s = duration_s;
  Rng rng(0xC0DE);
  auto start = std::chrono::steady_clock::now();
  while (rec.bytes_sent < total) {
    std::size_t n = std::min<std::uint64_t>(chunk_bytes, total - rec.bytes_sent);
    Bytes chunk = rng.next_bytes(n);
    nf::Json body{{"payload", hex_encode(chunk)}, {"session_id", ue.session_id}};
    sbi::SbiMessage msg;
    msg.method = sbi::Method::Post;
    msg.service = "nupf-data";
    msg.path = "forward";
    msg.body = nf::json_to_bytes(body);
    sbi::SbiMessage resp = ch.send_request(std::move(msg));
    nf::Json out = nf::json_from_bytes(resp.body);
    rec.bytes_sent += n;
    rec.bytes_delivered += hex_decode(out.at("payload").get<std::string>()).size();
  }
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.goodput_bytes_per_s = wall > 0 ? rec.bytes_delivered / wall : 0;
  return rec;
}

}  // namespace confcore::ran
