#include "confcore/nf/udm.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "confcore/nf/aka.hpp"

namespace confcore::nf {

std::vector<SubscriberRecord> generate_subscribers(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SubscriberRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SubscriberRecord rec;
    char supi[32];
    std::snprintf(supi, sizeof supi, "imsi-00101%010zu", i);
    rec.supi = supi;
    rec.k = rng.next_bytes(aka::kKeySize);
    rec.sqn = rng.next_below(1000);
    rec.home_network_keypair_ref = "home-key-1";
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {
std::string record_line(const SubscriberRecord& rec) {
  std::ostringstream out;
  out << rec.supi << "," << hex_encode(rec.k) << "," << rec.sqn;
  return out.str();
}

SubscriberRecord parse_record_line(const std::string& line) {
  auto c1 = line.find(',');
  auto c2 = line.find(',', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("bad subscriber line: " + line);
  SubscriberRecord rec;
  rec.supi = line.substr(0, c1);
  rec.k = hex_decode(line.substr(c1 + 1, c2 - c1 - 1));
  rec.sqn = std::stoull(line.substr(c2 + 1));
  rec.home_network_keypair_ref = "home-key-1";
  return rec;
}

std::string store_key_for(const std::string& supi) {
  // Store keys are digests so SUPIs do not leak through host-visible key names.
  Bytes digest = crypto::sha256(to_bytes(supi));
  return "sub/" + hex_encode(std::span(digest).subspan(0, 8));
}
}  // namespace

Udm::Udm(CoreEnv env, std::string instance_id, std::string address,
         std::shared_ptr<tee::Svm> svm, Options options)
    : NfBase(std::move(env), std::move(instance_id), "UDM", std::move(address), std::move(svm)),
      options_(std::move(options)) {
  home_key_id_ = "home-key-1";
  auto kp = crypto::make_exchange_keypair();
  home_pub_ = kp.public_key;
  if (svm_)
    svm_->put_protected("__home_priv", kp.secret_key);
  else
    home_priv_plain_ = kp.secret_key;
  install_handlers();
}

Bytes Udm::home_privkey() const {
  if (!svm_) return home_priv_plain_;
  auto priv = svm_->get_protected("__home_priv");
  if (!priv) throw NfError("UnknownKeyId", "home concealment key missing");
  return *priv;
}

void Udm::persist(const SubscriberRecord& rec) {
  if (svm_) svm_->put_protected(store_key_for(rec.supi), to_bytes(record_line(rec)));
  if (!options_.db_path.empty()) {
    // At-rest protection is the FDE layer's job; the write itself is what the
    // benchmark times.
    std::ofstream out(options_.db_path, std::ios::app);
    out << record_line(rec) << "\n";
    if (options_.flush_on_write) out.flush();
  }
}

void Udm::add_subscriber(const SubscriberRecord& rec) {
  {
    std::lock_guard lock(db_mu_);
    subscribers_[rec.supi] = rec;
  }
  persist(rec);
}

void Udm::seed(const std::vector<SubscriberRecord>& records) {
  for (const auto& rec : records) add_subscriber(rec);
}

Udm::CreateReport Udm::create_subscribers(std::size_t n, std::uint64_t seed) {
  auto start = std::chrono::steady_clock::now();
  auto records = generate_subscribers(n, seed);
  for (const auto& rec : records) add_subscriber(rec);
  auto end = std::chrono::steady_clock::now();
  CreateReport report;
  report.created = records.size();
  report.elapsed_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return report;
}

std::size_t Udm::import_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NfError("StorageFailure", "cannot open " + path);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    add_subscriber(parse_record_line(line));
    ++count;
  }
  return count;
}

void Udm::clear_subscribers() {
  std::lock_guard lock(db_mu_);
  subscribers_.clear();
  if (!options_.db_path.empty()) std::ofstream(options_.db_path, std::ios::trunc);
}

std::size_t Udm::subscriber_count() const {
  std::lock_guard lock(db_mu_);
  return subscribers_.size();
}

std::optional<SubscriberRecord> Udm::find_subscriber(const std::string& supi) const {
  std::lock_guard lock(db_mu_);
  auto it = subscribers_.find(supi);
  if (it == subscribers_.end()) return std::nullopt;
  return it->second;
}

std::string Udm::deconceal(const Suci& suci) const {
  auto result = deconceal_supi(suci, home_key_id_, home_privkey());
  switch (result.error) {
    case DeconcealError::UnknownKeyId:
      throw NfError("UnknownKeyId", "no keypair " + suci.home_pubkey_id);
    case DeconcealError::MacFailure:
      throw NfError("MacFailure", "suci authentication failed");
    case DeconcealError::None:
      break;
  }
  return result.supi;
}

void Udm::install_handlers() {
  endpoint_->add_handler(
      "nudm-ueau", "generate-vector", json_handler([this](const Json& in) {
        Suci suci = Suci::parse(hex_decode(in.at("suci").get<std::string>()));
        std::string supi = deconceal(suci);
        SubscriberRecord rec;
        {
          std::lock_guard lock(db_mu_);
          auto it = subscribers_.find(supi);
          if (it == subscribers_.end())
            throw NfError("UnknownSubscriber", "no record for de-concealed identity");
          rec = it->second;
        }
        std::uint64_t candidate = (rec.sqn + 1) & aka::kSqnMask;
        Bytes rand = crypto::random_bytes(aka::kRandSize);
        aka::AuthVector v = aka::generate_vector(rec.k, candidate, rand);
        log("udm: issued auth vector");
        return Json{{"supi", supi},
                    {"rand", hex_encode(v.rand)},
                    {"autn", hex_encode(v.autn)},
                    {"xres_star", hex_encode(v.xres_star)},
                    {"kausf", hex_encode(v.k_ausf)}};
      }),
      "nudm-ueau");

  endpoint_->add_handler(
      "nudm-ueau", "confirm-auth", json_handler([this](const Json& in) {
        std::string supi = in.at("supi").get<std::string>();
        bool success = in.at("success").get<bool>();
        std::lock_guard lock(db_mu_);
        auto it = subscribers_.find(supi);
        if (it == subscribers_.end()) throw NfError("UnknownSubscriber", "no record");
        if (success) {
          it->second.sqn = (it->second.sqn + 1) & aka::kSqnMask;
          persist(it->second);
        }
        return Json{{"sqn", it->second.sqn}};
      }),
      "nudm-ueau");

  endpoint_->add_handler(
      "nudm-ueau", "resync", json_handler([this](const Json& in) {
        std::string supi = in.at("supi").get<std::string>();
        std::uint64_t ue_sqn = in.at("ue_sqn").get<std::uint64_t>();
        Bytes mac = hex_decode(in.at("mac").get<std::string>());
        Bytes rand = hex_decode(in.at("rand").get<std::string>());
        std::lock_guard lock(db_mu_);
        auto it = subscribers_.find(supi);
        if (it == subscribers_.end()) throw NfError("UnknownSubscriber", "no record");
        if (aka::f1_star(it->second.k, ue_sqn, rand) != mac)
          throw NfError("MacFailure", "resync authentication failed");
        it->second.sqn = ue_sqn;
        persist(it->second);
        log("udm: resynced sqn");
        return Json{{"sqn", it->second.sqn}};
      }),
      "nudm-ueau");

  endpoint_->add_handler(
      "nudm-sdm", "get", json_handler([this](const Json& in) {
        std::string supi = in.at("supi").get<std::string>();
        std::lock_guard lock(db_mu_);
        bool exists = subscribers_.contains(supi);
        return Json{{"supi", supi}, {"exists", exists}};
      }),
      "nudm-sdm");
}

}  // namespace confcore::nf
