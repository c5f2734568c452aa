#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "confcore/bench/bench.hpp"
#include "confcore/ran/ransim.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRejected = 3;
constexpr int kBenchFailure = 4;
constexpr int kInternal = 5;

using namespace confcore;

struct CommonOpts {
  std::string config_path;
  std::string mode = "attested";
  std::uint64_t seed = 1;
};

sbi::ChannelMode parse_mode(const std::string& s) {
  if (s == "plain") return sbi::ChannelMode::Plain;
  if (s == "attested") return sbi::ChannelMode::Attested;
  throw CLI::ValidationError("--mode", "expected plain|attested");
}

testbed::Topology load_topology(const CommonOpts& opts) {
  return opts.config_path.empty() ? testbed::Topology::standard()
                                  : testbed::Topology::from_json_file(opts.config_path);
}

std::unique_ptr<testbed::Core> bring_up(const CommonOpts& opts) {
  testbed::Core::Options core_opts;
  core_opts.mode = parse_mode(opts.mode);
  core_opts.seed = opts.seed;
  return std::make_unique<testbed::Core>(load_topology(opts), core_opts);
}

int cmd_deploy(const CommonOpts& opts) {
  auto core = bring_up(opts);
  std::cout << "fleet (" << core->fleet().size() << " instances, mode=" << opts.mode
            << ")\n";
  for (const auto& inst : core->fleet()) {
    std::cout << "  " << inst->instance_id << "  " << vnfm::nf_type_name(inst->spec.nf_type)
              << "  endpoint=" << inst->endpoint
              << "  state=" << vnfm::lifecycle_state_name(inst->lifecycle_state)
              << "\n    measurement=" << inst->svm->measurement().hex()
              << "\n    session_ttl_ms=" << inst->session.ttl_ms << "\n";
  }
  return kOk;
}

int cmd_attest(const CommonOpts& opts, const std::string& instance_id) {
  auto core = bring_up(opts);
  auto inst = core->orchestrator().find(instance_id);
  if (!inst) {
    std::cerr << "no such instance: " << instance_id << "\n";
    return kConfigError;
  }
  tee::Nonce nonce{};
  Bytes nb = crypto::random_bytes(nonce.size());
  std::copy(nb.begin(), nb.end(), nonce.begin());
  tee::AttestationReport report = inst->svm->generate_report(nonce);
  auto verdict = tee::verify_report_once(report, core->root_pubkey(), nonce,
                                         core->policy().allowlist,
                                         core->policy().required_features);
  std::cout << "instance " << instance_id << "\n"
            << "  measurement   " << report.measurement.hex() << "\n"
            << "  firmware      " << report.platform_info.firmware_version << "\n"
            << "  features      0x" << std::hex << int(report.platform_info.features)
            << std::dec << "\n"
            << "  channel key   " << hex_encode(report.channel_pubkey) << "\n"
            << "  verdict       " << (verdict.verified ? "Verified" : "Rejected") << "\n";
  if (!verdict.verified) {
    std::cout << "  reason        " << tee::verify_reject_name(verdict.reason) << "\n";
    return kRejected;
  }
  return kOk;
}

int cmd_inspect(const CommonOpts& opts, const std::string& instance_id) {
  auto core = bring_up(opts);
  auto inst = core->orchestrator().find(instance_id);
  if (!inst) {
    std::cerr << "no such instance: " << instance_id << "\n";
    return kConfigError;
  }
  Bytes snapshot = inst->svm->host_read();
  std::string view(snapshot.begin(), snapshot.end());

  std::vector<std::string> hits;
  for (const auto& fleet_inst : core->fleet()) {
    std::string secret = testbed::Core::nf_secret(fleet_inst->spec.nf_type, opts.seed);
    if (view.find(secret) != std::string::npos) hits.push_back(secret);
  }
  if (view.find("imsi-") != std::string::npos) hits.push_back("imsi-* (SUPI)");

  std::cout << "instance " << instance_id << ": host-visible snapshot " << snapshot.size()
            << " bytes\n";
  if (hits.empty()) {
    std::cout << "  no plaintext secrets found\n";
  } else {
    for (const auto& h : hits) std::cout << "  plaintext secret visible: " << h << "\n";
  }
  return kOk;
}

int cmd_policy_check(const std::string& path) {
  zte::PolicyDocument policy = zte::load_policy_file(path);
  auto violations = policy.validate();
  if (violations.empty()) {
    std::cout << "policy ok\n";
    return kOk;
  }
  for (const auto& v : violations) std::cout << "violation: " << v << "\n";
  return kRejected;
}

struct BenchOpts {
  std::string scenario = "DbCreate";
  std::string modes = "both";
  std::vector<std::size_t> sizes;
  std::size_t trials = 30;
  std::size_t warmup = 10;
  std::string out_dir = ".";
};

bench::ScenarioKind parse_kind(const std::string& s) {
  if (s == "DbCreate") return bench::ScenarioKind::DbCreate;
  if (s == "NfRegistration") return bench::ScenarioKind::NfRegistration;
  if (s == "UeRegistration") return bench::ScenarioKind::UeRegistration;
  throw CLI::ValidationError("--scenario",
                             "expected DbCreate|NfRegistration|UeRegistration");
}

std::vector<std::size_t> default_sizes(bench::ScenarioKind kind) {
  std::vector<std::size_t> out;
  if (kind == bench::ScenarioKind::DbCreate)
    for (std::size_t s = 100; s <= 1000; s += 100) out.push_back(s);
  else if (kind == bench::ScenarioKind::NfRegistration)
    for (std::size_t s = 20; s <= 200; s += 20) out.push_back(s);
  else
    for (std::size_t s = 10; s <= 100; s += 10) out.push_back(s);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

int cmd_bench(const CommonOpts& common, const BenchOpts& opts) {
  bench::Scenario scenario;
  scenario.kind = parse_kind(opts.scenario);
  scenario.sizes = opts.sizes.empty() ? default_sizes(scenario.kind) : opts.sizes;
  scenario.trials = opts.trials;
  scenario.warmup = opts.warmup;
  scenario.seed = common.seed;

  std::vector<sbi::ChannelMode> modes;
  if (opts.modes == "both")
    modes = {sbi::ChannelMode::Plain, sbi::ChannelMode::Attested};
  else
    modes = {parse_mode(opts.modes)};

  testbed::Topology topology = load_topology(common);
  std::filesystem::create_directories(opts.out_dir);

  std::vector<bench::BenchReport> reports;
  for (auto mode : modes) {
    scenario.mode = mode;
    bench::BenchReport report = bench::run(scenario, topology);
    std::string stem = std::string(bench::scenario_kind_name(report.kind)) + "-" +
                       bench::mode_name(report.mode);
    write_file(std::filesystem::path(opts.out_dir) / (stem + "-raw.csv"),
               bench::raw_csv(report));
    write_file(std::filesystem::path(opts.out_dir) / (stem + "-summary.csv"),
               bench::summary_csv(report));

    std::cout << bench::scenario_kind_name(report.kind) << " [" << bench::mode_name(mode)
              << "]  trials=" << report.trials << "\n";
    std::cout << "  size      mean_ms    median_ms    p95_ms     stddev_ms\n";
    for (const auto& row : report.rows) {
      char line[160];
      std::snprintf(line, sizeof(line), "  %-8zu %-10.4f %-12.4f %-10.4f %-10.4f", row.size,
                    row.stats.mean_ms, row.stats.median_ms, row.stats.p95_ms,
                    row.stats.stddev_ms);
      std::cout << line << "\n";
    }
    char fit[160];
    std::snprintf(fit, sizeof(fit), "  fit: slope=%.6g ms/unit intercept=%.6g r2=%.6f",
                  report.fit.slope, report.fit.intercept, report.fit.r_squared);
    std::cout << fit << "\n";
    reports.push_back(std::move(report));
  }

  if (reports.size() == 2) {
    auto overhead = bench::compare(reports[0], reports[1]);
    std::string stem = std::string(bench::scenario_kind_name(scenario.kind)) + "-overhead";
    write_file(std::filesystem::path(opts.out_dir) / (stem + ".csv"),
               bench::overhead_csv(overhead));
    std::cout << "attested-minus-plain delta per size:\n";
    for (const auto& row : overhead) {
      char line[160];
      std::snprintf(line, sizeof(line), "  %-8zu %+.4f ms (%+.2f%%)", row.size, row.delta_ms,
                    row.delta_relative * 100.0);
      std::cout << line << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidential 5G core testbed"};
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--config", common.config_path, "Topology JSON file");
  app.add_option("--mode", common.mode, "plain|attested")->capture_default_str();
  app.add_option("--seed", common.seed, "Deterministic seed")->capture_default_str();

  auto* deploy = app.add_subcommand("deploy", "Deploy the topology, print fleet summary");

  auto* bench_cmd = app.add_subcommand("bench", "Run benchmark scenarios, write CSVs");
  BenchOpts bench_opts;
  bench_cmd->add_option("--scenario", bench_opts.scenario,
                        "DbCreate|NfRegistration|UeRegistration")
      ->capture_default_str();
  bench_cmd->add_option("--bench-mode", bench_opts.modes, "plain|attested|both")
      ->capture_default_str();
  bench_cmd->add_option("--sizes", bench_opts.sizes, "Workload sizes (strictly increasing)");
  bench_cmd->add_option("--trials", bench_opts.trials, "Trials per size")
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench_opts.warmup, "Excluded warm-up trials per size")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_opts.out_dir, "Output directory for CSVs")
      ->capture_default_str();

  std::string instance_id;
  auto* attest = app.add_subcommand("attest", "Challenge and verify one instance");
  attest->add_option("instance", instance_id, "Instance id (e.g. udm-1)")->required();
  auto* inspect = app.add_subcommand("inspect", "Host-memory snapshot and secret scan");
  inspect->add_option("instance", instance_id, "Instance id (e.g. udm-1)")->required();

  std::string policy_path;
  auto* policy_check = app.add_subcommand("policy-check", "Validate a policy file");
  policy_check->add_option("policy", policy_path, "Policy file path")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (deploy->parsed()) return cmd_deploy(common);
    if (bench_cmd->parsed()) return cmd_bench(common, bench_opts);
    if (attest->parsed()) return cmd_attest(common, instance_id);
    if (inspect->parsed()) return cmd_inspect(common, instance_id);
    if (policy_check->parsed()) return cmd_policy_check(policy_path);
  } catch (const confcore::vnfm::DeployError& e) {
    std::cerr << "deployment rejected at " << confcore::vnfm::deploy_step_name(e.step())
              << ": " << e.what() << "\n";
    return kRejected;
  } catch (const confcore::bench::BenchError& e) {
    std::cerr << "benchmark failed [" << e.code() << "]: " << e.what() << "\n";
    return kBenchFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
