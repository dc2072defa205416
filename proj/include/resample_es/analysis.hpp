#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resample_es/strategy.hpp"

namespace resample_es {

enum class RateScale { linear_in_n, linear_in_log_n };
enum class RateAbscissa { iterations, evaluations };
enum class Statistic { median, mean };

std::string to_string(RateScale scale);
std::string to_string(Statistic statistic);

// Least-squares fit of log distance against the abscissa (or its log).
// slope is the decay rate; window is the index range actually fitted,
// after burn-in removal and truncation at the first non-finite ordinate.
struct RateEstimate {
  RateScale scale = RateScale::linear_in_n;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t first = 0;  // inclusive
  std::size_t last = 0;   // inclusive
};

// Statistic of log distance across runs at each shared abscissa point.
// Traces of unequal length are truncated to the shortest prefix; diverged
// and underflowed runs participate like any other.
struct AggregateCurve {
  Statistic statistic = Statistic::median;
  std::vector<double> abscissa{};  // cumulative evaluation counts
  std::vector<double> ordinate{};  // statistic of log distance
  std::size_t run_count = 0;
};

RateEstimate estimate_rate(std::span<const double> abscissa,
                           std::span<const double> log_dist, RateScale scale,
                           double burn_in_fraction);

RateEstimate estimate_rate(const RunTrace& trace, RateScale scale,
                           RateAbscissa abscissa, double burn_in_fraction);

RateEstimate estimate_rate(const AggregateCurve& curve, RateScale scale,
                           double burn_in_fraction);

// Smallest noise decay exponent z for which log-linear convergence is
// guaranteed, given per-iteration envelope rates 0 < alpha <= alpha_prime:
// max(2(p a' - (a - a')d) / (p a), 2(2a' - a) / a). Equals 2 at a = a'.
double theorem_threshold(int p, int d, double alpha, double alpha_prime);

// Guaranteed per-evaluation rate bound -alpha / (lambda * Y).
double corollary_rate(double alpha, int lambda, int resamplings);

// Volume of the unit ball in R^d.
double ball_constant(int d);

// Lebesgue measure of the fitness shell {x : | ||x||^p - v | <= ell}.
// For v < ell the inner radius is empty and the full ball is returned.
double shell_measure(double v, double ell, int d, int p);

AggregateCurve aggregate_runs(std::span<const RunTrace> traces,
                              Statistic statistic);

}  // namespace resample_es
