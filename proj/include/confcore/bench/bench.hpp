#pragma once

#include "confcore/testbed.hpp"

namespace confcore::bench {

class BenchError : public std::runtime_error {
 public:
  BenchError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct Stats {
  std::size_t n = 0;
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;  // nearest-rank
  double stddev_ms = 0;
};

Stats compute_stats(std::vector<double> samples);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;
};

/// Closed-form least squares over (x, y) pairs. R² of a zero-variance y is 1.
LinearFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys);

enum class ScenarioKind { DbCreate, NfRegistration, UeRegistration };

const char* scenario_kind_name(ScenarioKind k);
const char* mode_name(sbi::ChannelMode m);

struct Scenario {
  ScenarioKind kind = ScenarioKind::DbCreate;
  std::vector<std::size_t> sizes;  // non-empty, strictly increasing
  std::size_t trials = 1;
  sbi::ChannelMode mode = sbi::ChannelMode::Plain;
  std::uint64_t seed = 1;
  std::size_t warmup = 10;   // excluded trials per size
  bool parallel = false;     // stress only; measurements default to sequential

  void validate() const;  // throws std::invalid_argument
};

struct BenchRow {
  std::size_t size = 0;
  Stats stats;
};

struct BenchReport {
  ScenarioKind kind = ScenarioKind::DbCreate;
  sbi::ChannelMode mode = sbi::ChannelMode::Plain;
  std::size_t trials = 0;
  std::vector<BenchRow> rows;
  std::vector<std::vector<double>> raw;  // post-warmup samples, parallel to rows
  LinearFit fit;                         // mean_ms against size
};

/// Runs the scenario against a fresh deployment of the topology in the
/// scenario's mode. Throws BenchError("DeploymentFailure") when the core
/// cannot come up, and propagates workload errors.
BenchReport run(const Scenario& scenario, const testbed::Topology& topology);

struct OverheadRow {
  std::size_t size = 0;
  double a_mean_ms = 0;
  double b_mean_ms = 0;
  double delta_ms = 0;      // b - a
  double delta_relative = 0;  // (b - a) / a; 0 when a == 0
};

/// Per-size deltas between two reports of the same scenario (modes may
/// differ). Throws BenchError("ScenarioMismatch") otherwise.
std::vector<OverheadRow> compare(const BenchReport& a, const BenchReport& b);

std::string raw_csv(const BenchReport& report);
std::string summary_csv(const BenchReport& report);
std::string overhead_csv(const std::vector<OverheadRow>& rows);

}  // namespace confcore::bench
