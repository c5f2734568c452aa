#include <chrono>
#include <cstdio>
#include <future>

#include "confcore/bench/bench.hpp"
#include "confcore/ran/ransim.hpp"

namespace confcore::bench {

const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::DbCreate: return "DbCreate";
    case ScenarioKind::NfRegistration: return "NfRegistration";
    case ScenarioKind::UeRegistration: return "UeRegistration";
  }
  return "?";
}

const char* mode_name(sbi::ChannelMode m) {
  return m == sbi::ChannelMode::Attested ? "attested" : "plain";
}

void Scenario::validate() const {
  if (sizes.empty()) throw std::invalid_argument("scenario sizes must be non-empty");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1])
      throw std::invalid_argument("scenario sizes must be strictly increasing");
  if (trials < 1) throw std::invalid_argument("scenario trials must be >= 1");
  if (parallel && kind != ScenarioKind::NfRegistration)
    throw std::invalid_argument("parallel trials are supported for NfRegistration only");
}

namespace {

double timed_ms(const std::function<void()>& fn) {
  auto start = std::chrono::steady_clock::now();
  fn();
  auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

void register_batch(testbed::Core& core, std::size_t size, std::size_t iter) {
  for (std::size_t i = 0; i < size; ++i) {
    nf::NfProfile p;
    p.instance_id =
        "bench-nf-" + std::to_string(size) + "-" + std::to_string(iter) + "-" + std::to_string(i);
    p.nf_type = "SMF";
    p.services = {"nsmf-pdusession"};
    p.endpoint = "bench-ep-" + p.instance_id;
    core.amf()->call(core.env().nrf_address, "nnrf-nfm", "register",
                     nf::Json{{"profile", p.to_json()}}, "nnrf-nfm", "NRF");
  }
}

void deregister_batch(testbed::Core& core, std::size_t size, std::size_t iter) {
  for (std::size_t i = 0; i < size; ++i) {
    std::string id =
        "bench-nf-" + std::to_string(size) + "-" + std::to_string(iter) + "-" + std::to_string(i);
    core.amf()->call(core.env().nrf_address, "nnrf-nfm", "deregister",
                     nf::Json{{"instance_id", id}}, "nnrf-nfm", "NRF");
  }
}

double one_sample(testbed::Core& core, const Scenario& sc, std::size_t size,
                  std::size_t iter) {
  switch (sc.kind) {
    case ScenarioKind::DbCreate: {
      core.udm()->clear_subscribers();
      return timed_ms([&] { core.udm()->create_subscribers(size, sc.seed + iter); });
    }
    case ScenarioKind::NfRegistration: {
      double ms = timed_ms([&] { register_batch(core, size, iter); });
      deregister_batch(core, size, iter);
      return ms;
    }
    case ScenarioKind::UeRegistration: {
      core.udm()->clear_subscribers();
      core.udm()->create_subscribers(size, sc.seed);
      auto pop = ran::UePopulation::spawn(size, sc.seed);
      std::vector<ran::UeTimingRecord> records;
      double ms = timed_ms([&] {
        ran::StormOptions opts;
        opts.trials = 1;
        opts.seed = sc.seed + iter;
        records = ran::registration_storm(pop, *core.amf(), *core.udm(), opts);
      });
      for (const auto& r : records)
        if (!r.success)
          throw BenchError("RegistrationFailed", r.supi + " failed at " + r.failed_stage);
      return ms;
    }
  }
  throw BenchError("InternalError", "unknown scenario kind");
}

}  // namespace

BenchReport run(const Scenario& scenario, const testbed::Topology& topology) {
  scenario.validate();

  std::unique_ptr<testbed::Core> core;
  try {
    testbed::Core::Options opts;
    opts.mode = scenario.mode;
    opts.seed = scenario.seed;
    core = std::make_unique<testbed::Core>(topology, opts);
  } catch (const std::exception& e) {
    throw BenchError("DeploymentFailure", e.what());
  }

  BenchReport report;
  report.kind = scenario.kind;
  report.mode = scenario.mode;
  report.trials = scenario.trials;

  std::vector<std::vector<double>> samples(scenario.sizes.size(),
                                           std::vector<double>(scenario.trials));
  if (scenario.parallel) {
    for (std::size_t s = 0; s < scenario.sizes.size(); ++s) {
      std::size_t size = scenario.sizes[s];
      for (std::size_t w = 0; w < scenario.warmup; ++w) one_sample(*core, scenario, size, w);
      std::vector<std::future<double>> futures;
      futures.reserve(scenario.trials);
      for (std::size_t t = 0; t < scenario.trials; ++t)
        futures.push_back(std::async(std::launch::async, [&, size, t] {
          return one_sample(*core, scenario, size, scenario.warmup + t);
        }));
      for (std::size_t t = 0; t < scenario.trials; ++t) samples[s][t] = futures[t].get();
    }
  } else {
    // Trials are interleaved across sizes so slow machine phases (frequency
    // scaling, scheduling bursts) spread over the whole ladder instead of
    // biasing one size's block.
    for (std::size_t w = 0; w < scenario.warmup; ++w)
      for (std::size_t size : scenario.sizes) one_sample(*core, scenario, size, w);
    for (std::size_t t = 0; t < scenario.trials; ++t)
      for (std::size_t s = 0; s < scenario.sizes.size(); ++s)
        samples[s][t] = one_sample(*core, scenario, scenario.sizes[s], scenario.warmup + t);
  }

  for (std::size_t s = 0; s < scenario.sizes.size(); ++s) {
    BenchRow row;
    row.size = scenario.sizes[s];
    row.stats = compute_stats(samples[s]);
    report.rows.push_back(row);
    report.raw.push_back(std::move(samples[s]));
  }

  if (report.rows.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& row : report.rows) {
      xs.push_back(static_cast<double>(row.size));
      ys.push_back(row.stats.mean_ms);
    }
    report.fit = least_squares(xs, ys);
  }
  return report;
}

std::vector<OverheadRow> compare(const BenchReport& a, const BenchReport& b) {
  if (a.kind != b.kind || a.trials != b.trials || a.rows.size() != b.rows.size())
    throw BenchError("ScenarioMismatch", "reports cover different scenarios");
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    if (a.rows[i].size != b.rows[i].size)
      throw BenchError("ScenarioMismatch", "reports cover different size ladders");

  std::vector<OverheadRow> out;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    OverheadRow row;
    row.size = a.rows[i].size;
    row.a_mean_ms = a.rows[i].stats.mean_ms;
    row.b_mean_ms = b.rows[i].stats.mean_ms;
    row.delta_ms = row.b_mean_ms - row.a_mean_ms;
    row.delta_relative = row.a_mean_ms == 0 ? 0 : row.delta_ms / row.a_mean_ms;
    out.push_back(row);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_fit(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string raw_csv(const BenchReport& report) {
  std::string out = "scenario,mode,size,trial,elapsed_ms\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    for (std::size_t t = 0; t < report.raw[i].size(); ++t)
      out += std::string(scenario_kind_name(report.kind)) + "," + mode_name(report.mode) +
             "," + std::to_string(report.rows[i].size) + "," + std::to_string(t) + "," +
             fmt(report.raw[i][t]) + "\n";
  return out;
}

std::string summary_csv(const BenchReport& report) {
  std::string out =
      "# attested-mode overhead measures emulation (report verification and channel "
      "cryptography), not memory-encryption hardware\n";
  out += "scenario,mode,size,mean_ms,median_ms,p95_ms,stddev_ms\n";
  for (const auto& row : report.rows)
    out += std::string(scenario_kind_name(report.kind)) + "," + mode_name(report.mode) +
           "," + std::to_string(row.size) + "," + fmt(row.stats.mean_ms) + "," +
           fmt(row.stats.median_ms) + "," + fmt(row.stats.p95_ms) + "," +
           fmt(row.stats.stddev_ms) + "\n";
  out += "#fit," + fmt_fit(report.fit.slope) + "," + fmt_fit(report.fit.intercept) + "," +
         fmt_fit(report.fit.r_squared) + "\n";
  return out;
}

std::string overhead_csv(const std::vector<OverheadRow>& rows) {
  std::string out = "size,a_mean_ms,b_mean_ms,delta_ms,delta_relative\n";
  for (const auto& row : rows)
    out += std::to_string(row.size) + "," + fmt(row.a_mean_ms) + "," + fmt(row.b_mean_ms) +
           "," + fmt(row.delta_ms) + "," + fmt(row.delta_relative) + "\n";
  return out;
}

}  // namespace confcore::bench
