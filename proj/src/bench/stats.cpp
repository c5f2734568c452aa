#include <algorithm>
#include <cmath>

#include "confcore/bench/bench.hpp"

namespace confcore::bench {

Stats compute_stats(std::vector<double> samples) {
  Stats s;
  s.n = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());

  double sum = 0;
  for (double v : samples) sum += v;
  s.mean_ms = sum / static_cast<double>(s.n);

  if (s.n % 2 == 1)
    s.median_ms = samples[s.n / 2];
  else
    s.median_ms = (samples[s.n / 2 - 1] + samples[s.n / 2]) / 2.0;

  std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(s.n)));
  if (rank == 0) rank = 1;
  s.p95_ms = samples[rank - 1];

  double ss = 0;
  for (double v : samples) ss += (v - s.mean_ms) * (v - s.mean_ms);
  s.stddev_ms = std::sqrt(ss / static_cast<double>(s.n));
  return s;
}

LinearFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("least_squares needs at least two matched points");
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("least_squares on degenerate x values");

  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  double mean_y = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace confcore::bench
