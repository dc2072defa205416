#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resample_es/problem.hpp"
#include "resample_es/rng.hpp"

namespace resample_es {

// Binomial point estimate with a 95% confidence half-width: normal
// approximation in the interior, exact Clopper-Pearson bound when the
// count sits on 0 or on trials.
struct ProportionEstimate {
  double p_hat = 0.0;
  double half_width = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
};

ProportionEstimate binomial_proportion(std::uint64_t successes,
                                       std::uint64_t trials);

// Parent state an offspring cloud is sampled around.
struct SelectionState {
  std::vector<double> center{};
  double sigma = 1.0;
};

// Fraction of trials in which at least one offspring pair has an exact
// fitness gap no larger than delta. Offspring are center + sigma * N_d.
ProportionEstimate probe_pair_proximity(const SelectionState& state,
                                        int lambda, int p, double delta,
                                        std::uint64_t trials,
                                        const SeedSpec& seed);

// Fraction of trials in which at least one of the fixed points sees its
// averaged noise deviate from the exact value by delta / 2 or more.
ProportionEstimate probe_noise_excess(
    const ProblemSpec& spec, std::span<const std::vector<double>> points,
    int resamplings, double delta, std::uint64_t trials,
    const SeedSpec& seed);

// Fraction of trials in which some offspring pair in strict exact-fitness
// order has its averaged noisy values in the opposite (weak) order. Pairs
// with equal exact fitness cannot be misranked.
ProportionEstimate probe_misranking(const ProblemSpec& spec,
                                    const SelectionState& state, int lambda,
                                    int resamplings, std::uint64_t trials,
                                    const SeedSpec& seed);

// Open interval of threshold decay rates gamma for which both proof-side
// exponents stay positive: the pair-proximity exponent
// d(alpha - alpha') + m gamma - m p alpha' and the noise-tail exponent
// alpha z p - 2 gamma, with m the small-gap branch min(1, d/p). Empty
// exactly when z is at or below the convergence threshold.
struct GammaWindow {
  double lower = 0.0;
  double upper = 0.0;
  [[nodiscard]] bool empty() const { return !(lower < upper); }
};

GammaWindow admissible_gamma(double alpha, double alpha_prime, int d, int p,
                             double z);

enum class StateSource { synthetic, replay };

struct ProbeConfig {
  double gamma = 0.08;    // threshold schedule delta_n = delta0 exp(-gamma n)
  double delta0 = 1.0;
  std::uint64_t trials = 100'000;
  std::vector<int> iterations{10, 20, 40, 80};
  StateSource source = StateSource::synthetic;
  // Synthetic log-linear schedule: dist_n = C exp(-alpha n),
  // sigma_n = V exp(-alpha n).
  double alpha = 0.05;
  double alpha_prime = 0.05;
  double scale_c = 1.0;
  double scale_v = 1.0;
  std::string trace{};  // replay source, resolved by the harness

  [[nodiscard]] std::vector<std::string> validate() const;
};

struct ProbePoint {
  int n = 0;
  double delta = 0.0;
  double dist = 0.0;   // state distance at n
  double sigma = 0.0;  // state step-size at n
  double gap_ratio = 0.0;   // delta / dist^p
  double m_branch = 1.0;    // arg of max(ratio, ratio^{d/p})
  ProportionEstimate pair_proximity{};  // P1
  ProportionEstimate noise_excess{};    // P3
  ProportionEstimate misranking{};      // P4
};

struct MisrankReport {
  double gamma = 0.0;
  double delta0 = 1.0;
  GammaWindow window{};
  double misranking_sum = 0.0;  // sum of P4 estimates over the points
  std::vector<ProbePoint> points{};
};

std::vector<SelectionState> synthetic_states(const ProbeConfig& cfg, int d);

// Runs all three probes at each configured iteration on shared trial
// samples, so the union bound P4 <= P1 + P3 holds count-by-count.
// `states` must align with cfg.iterations; empty is allowed only for the
// synthetic source, which generates its own schedule.
MisrankReport probe_schedule(const ProblemSpec& spec, int lambda,
                             int resamplings, const ProbeConfig& cfg,
                             const SeedSpec& seed,
                             std::span<const SelectionState> states = {});

}  // namespace resample_es
