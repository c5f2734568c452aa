#pragma once

#include "confcore/nf/amf.hpp"
#include "confcore/nf/udm.hpp"
#include "confcore/nf/stubs.hpp"

namespace confcore::ran {

/// UE-side derivation functions. Deliberately a separate implementation path
/// from the network side (own HMAC composition) so agreement between the two
/// is a meaningful check, not a tautology.
namespace uekdf {
Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);
Bytes res(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand);
Bytes ak(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand);
Bytes mac_a(std::span<const std::uint8_t> k, std::uint64_t sqn,
            std::span<const std::uint8_t> amf_field, std::span<const std::uint8_t> rand);
Bytes mac_s(std::span<const std::uint8_t> k, std::uint64_t ue_sqn,
            std::span<const std::uint8_t> rand);
Bytes kausf(std::span<const std::uint8_t> k, std::span<const std::uint8_t> rand,
            std::uint64_t sqn);
Bytes kseaf(std::span<const std::uint8_t> kausf_key, std::string_view serving_network);
}  // namespace uekdf

class RanError : public std::runtime_error {
 public:
  RanError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

enum class UeState { Idle, Registering, Registered, Failed };

struct SimUe {
  std::string supi;
  Bytes k;
  std::uint64_t sqn = 0;
  UeState state = UeState::Idle;
  std::string session_id;
  bool last_mac_valid = true;  // outcome of the network-authentication check

  nf::UeResponse respond_challenge(const nf::UeChallenge& challenge);
  nf::Suci conceal(const std::string& home_key_id,
                   std::span<const std::uint8_t> home_pubkey) const;
};

struct UePopulation {
  std::vector<SimUe> ues;

  /// Generates n UEs from the shared subscriber generator.
  static UePopulation spawn(std::size_t n, std::uint64_t seed);
  /// Verifies the population mirrors the UDM records; throws SeedMismatch.
  void crosscheck(const nf::Udm& udm) const;
};

struct UeTimingRecord {
  std::string supi;
  std::size_t trial = 0;
  bool success = false;
  std::string failed_stage;
  std::array<double, 4> stage_ms{};
  double total_ms = 0;
};

enum class ArrivalModel { Sequential, Poisson };

struct StormOptions {
  ArrivalModel arrival = ArrivalModel::Sequential;
  double poisson_rate_per_s = 10.0;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
};

/// Runs every UE through registration `trials` times; failures are recorded
/// per UE, never thrown.
std::vector<UeTimingRecord> registration_storm(UePopulation& population, nf::Amf& amf,
                                               const nf::Udm& udm, const StormOptions& options);

struct ThroughputRecord {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_delivered = 0;
  double duration_s = 0;
  double goodput_bytes_per_s = 0;
};

/// Pushes synthetic traffic through the UPF pass-through to a sink.
/// Requires a registered UE with an established session.
ThroughputRecord traffic_session(const SimUe& ue, sbi::Transport& transport,
                                 const std::string& upf_address, double bytes_per_s,
                                 double duration_s, const Clock& clock,
                                 std::size_t chunk_bytes = 4096);

}  // namespace confcore::ran
