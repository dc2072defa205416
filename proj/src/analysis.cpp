#include "resample_es/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resample_es {

std::string to_string(RateScale scale) {
  return scale == RateScale::linear_in_n ? "linear-in-n" : "linear-in-log-n";
}

std::string to_string(Statistic statistic) {
  return statistic == Statistic::median ? "median" : "mean";
}

RateEstimate estimate_rate(std::span<const double> abscissa,
                           std::span<const double> log_dist, RateScale scale,
                           double burn_in_fraction) {
  if (abscissa.size() != log_dist.size()) {
    throw std::invalid_argument("estimate_rate: series lengths differ");
  }
  if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0) {
    throw std::invalid_argument("estimate_rate: burn-in must lie in [0, 1)");
  }
  const std::size_t total = abscissa.size();
  const std::size_t first = static_cast<std::size_t>(
      burn_in_fraction * static_cast<double>(total));
  // Underflowed runs end in a non-finite log distance; fit the finite
  // prefix of the window only.
  std::size_t end = first;
  while (end < total && std::isfinite(log_dist[end])) ++end;
  if (end - first < 10) {
    throw std::invalid_argument(
        "estimate_rate: fewer than 10 usable points after burn-in");
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double count = static_cast<double>(end - first);
  for (std::size_t i = first; i < end; ++i) {
    const double x = scale == RateScale::linear_in_n
                         ? abscissa[i]
                         : std::log(abscissa[i]);
    const double y = log_dist[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double var_x = sxx - sx * sx / count;
  const double cov_xy = sxy - sx * sy / count;
  const double var_y = syy - sy * sy / count;
  if (var_x <= 0.0) {
    throw std::invalid_argument("estimate_rate: degenerate abscissa");
  }

  RateEstimate est;
  est.scale = scale;
  est.slope = cov_xy / var_x;
  est.intercept = (sy - est.slope * sx) / count;
  // A constant series is fitted exactly by its mean.
  est.r_squared =
      var_y <= 0.0 ? 1.0
                   : std::clamp(cov_xy * cov_xy / (var_x * var_y), 0.0, 1.0);
  est.first = first;
  est.last = end - 1;
  return est;
}

RateEstimate estimate_rate(const RunTrace& trace, RateScale scale,
                           RateAbscissa abscissa, double burn_in_fraction) {
  std::vector<double> xs(trace.records.size());
  std::vector<double> ys(trace.records.size());
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    xs[i] = abscissa == RateAbscissa::iterations
                ? static_cast<double>(trace.records[i].n)
                : static_cast<double>(trace.records[i].evals);
    ys[i] = trace.records[i].log_dist;
  }
  return estimate_rate(xs, ys, scale, burn_in_fraction);
}

RateEstimate estimate_rate(const AggregateCurve& curve, RateScale scale,
                           double burn_in_fraction) {
  return estimate_rate(curve.abscissa, curve.ordinate, scale,
                       burn_in_fraction);
}

double theorem_threshold(int p, int d, double alpha, double alpha_prime) {
  if (p < 1 || d < 1) {
    throw std::invalid_argument("theorem_threshold: p and d must be >= 1");
  }
  if (alpha <= 0.0 || alpha_prime <= 0.0 || alpha > alpha_prime) {
    throw std::invalid_argument(
        "theorem_threshold: need 0 < alpha <= alpha_prime");
  }
  const double pd = static_cast<double>(p);
  const double branch_geometry =
      2.0 * (pd * alpha_prime - (alpha - alpha_prime) * d) / (pd * alpha);
  const double branch_noise = 2.0 * (2.0 * alpha_prime - alpha) / alpha;
  return std::max(branch_geometry, branch_noise);
}

double corollary_rate(double alpha, int lambda, int resamplings) {
  if (alpha <= 0.0 || lambda < 1 || resamplings < 1) {
    throw std::invalid_argument("corollary_rate: inputs must be positive");
  }
  return -alpha / (static_cast<double>(lambda) *
                   static_cast<double>(resamplings));
}

double ball_constant(int d) {
  if (d < 1) throw std::invalid_argument("ball_constant: d must be >= 1");
  // (2 pi)^{d/2} / (2 * 4 * ... * d)        for even d
  // 2 (2 pi)^{(d-1)/2} / (1 * 3 * ... * d)  for odd d
  // accumulated factor-by-factor to stay in double range at large d.
  const double two_pi = 2.0 * std::numbers::pi;
  double k = d % 2 == 0 ? 1.0 : 2.0;
  for (int m = d % 2 == 0 ? 2 : 3; m <= d; m += 2) k *= two_pi / m;
  return k;
}

double shell_measure(double v, double ell, int d, int p) {
  if (ell <= 0.0) throw std::invalid_argument("shell_measure: ell must be > 0");
  if (v < 0.0) throw std::invalid_argument("shell_measure: v must be >= 0");
  if (p < 1) throw std::invalid_argument("shell_measure: p must be >= 1");
  const double k = ball_constant(d);
  const double dp = static_cast<double>(d) / static_cast<double>(p);
  const double outer = std::pow(v + ell, dp);
  const double inner = v >= ell ? std::pow(v - ell, dp) : 0.0;
  return k * (outer - inner);
}

AggregateCurve aggregate_runs(std::span<const RunTrace> traces,
                              Statistic statistic) {
  if (traces.empty()) {
    throw std::invalid_argument("aggregate_runs: no traces");
  }
  std::size_t shortest = traces[0].records.size();
  for (const RunTrace& t : traces) {
    if (t.config.lambda != traces[0].config.lambda ||
        t.config.resamplings != traces[0].config.resamplings ||
        t.problem.d != traces[0].problem.d) {
      throw std::invalid_argument("aggregate_runs: traces mix config shapes");
    }
    shortest = std::min(shortest, t.records.size());
  }

  AggregateCurve curve;
  curve.statistic = statistic;
  curve.run_count = traces.size();
  curve.abscissa.resize(shortest);
  curve.ordinate.resize(shortest);
  std::vector<double> row(traces.size());
  for (std::size_t i = 0; i < shortest; ++i) {
    curve.abscissa[i] = static_cast<double>(traces[0].records[i].evals);
    for (std::size_t r = 0; r < traces.size(); ++r) {
      row[r] = traces[r].records[i].log_dist;
    }
    if (statistic == Statistic::mean) {
      double sum = 0.0;
      for (double v : row) sum += v;
      curve.ordinate[i] = sum / static_cast<double>(row.size());
    } else {
      const std::size_t mid = row.size() / 2;
      std::nth_element(row.begin(), row.begin() + mid, row.end());
      double med = row[mid];
      if (row.size() % 2 == 0) {
        const double below =
            *std::max_element(row.begin(), row.begin() + mid);
        // Sum form keeps the midpoint exact when one member is -infinity.
        med = (below + med) / 2.0;
      }
      curve.ordinate[i] = med;
    }
  }
  return curve;
}

}  // namespace resample_es
