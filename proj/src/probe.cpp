#include "resample_es/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

namespace resample_es {

namespace {

constexpr double kZ975 = 1.959963984540054;  // 97.5% normal quantile
constexpr double kAlphaCi = 0.05;

void throw_joined(const std::vector<std::string>& errors) {
  if (errors.empty()) return;
  std::ostringstream out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i > 0) out << "; ";
    out << errors[i];
  }
  throw std::invalid_argument(out.str());
}

// One trial's offspring cloud around a parent state: exact fitness values
// and, when requested, the deviation of the averaged noisy value from the
// exact one. All draws come from the single per-trial stream.
struct TrialSample {
  std::vector<double> truth;
  std::vector<double> dev;
};

TrialSample sample_trial(const ProblemSpec& spec, const SelectionState& state,
                         int lambda, int resamplings, bool with_noise,
                         GaussianStream& stream) {
  const auto d = state.center.size();
  TrialSample sample;
  sample.truth.resize(static_cast<std::size_t>(lambda));
  sample.dev.assign(static_cast<std::size_t>(lambda), 0.0);
  std::vector<double> x(d);
  for (int i = 0; i < lambda; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = state.center[k] + state.sigma * stream.gaussian();
    }
    const double truth = expected_fitness(spec, x);
    sample.truth[static_cast<std::size_t>(i)] = truth;
    if (with_noise) {
      const double noisy = averaged_fitness(spec, x, resamplings, stream);
      sample.dev[static_cast<std::size_t>(i)] = noisy - truth;
    }
  }
  return sample;
}

bool any_pair_close(const TrialSample& s, double delta) {
  const std::size_t n = s.truth.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(s.truth[i] - s.truth[j]) <= delta) return true;
    }
  }
  return false;
}

bool any_noise_excess(const TrialSample& s, double delta) {
  for (const double dev : s.dev) {
    if (std::abs(dev) >= delta / 2.0) return true;
  }
  return false;
}

bool any_misranked(const TrialSample& s) {
  const std::size_t n = s.truth.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (s.truth[i] < s.truth[j] &&
          s.truth[i] + s.dev[i] >= s.truth[j] + s.dev[j]) {
        return true;
      }
    }
  }
  return false;
}

void check_probe_inputs(const SelectionState& state, int lambda,
                        double delta, std::uint64_t trials) {
  std::vector<std::string> errors;
  if (state.center.empty()) errors.push_back("state center must be non-empty");
  if (!(state.sigma >= 0.0) || !std::isfinite(state.sigma)) {
    errors.push_back("state sigma must be finite and non-negative");
  }
  if (lambda < 1) errors.push_back("lambda must be at least 1");
  if (!(delta >= 0.0)) errors.push_back("delta must be non-negative");
  if (trials < 1) errors.push_back("trials must be at least 1");
  throw_joined(errors);
}

}  // namespace

ProportionEstimate binomial_proportion(std::uint64_t successes,
                                       std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (successes > trials) {
    throw std::invalid_argument("successes cannot exceed trials");
  }
  ProportionEstimate est;
  est.successes = successes;
  est.trials = trials;
  const double t = static_cast<double>(trials);
  est.p_hat = static_cast<double>(successes) / t;
  if (successes == 0) {
    // Exact one-sided Clopper-Pearson bound; the normal width collapses
    // to zero on the boundary.
    est.half_width = 1.0 - std::pow(kAlphaCi / 2.0, 1.0 / t);
  } else if (successes == trials) {
    est.half_width = 1.0 - std::pow(kAlphaCi / 2.0, 1.0 / t);
  } else {
    est.half_width = kZ975 * std::sqrt(est.p_hat * (1.0 - est.p_hat) / t);
  }
  return est;
}

ProportionEstimate probe_pair_proximity(const SelectionState& state,
                                        int lambda, int p, double delta,
                                        std::uint64_t trials,
                                        const SeedSpec& seed) {
  check_probe_inputs(state, lambda, delta, trials);
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  ProblemSpec spec;
  spec.d = static_cast<int>(state.center.size());
  spec.p = p;
  spec.noise = NoiseKind::zero;
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    GaussianStream stream(seed.child(t));
    const TrialSample s =
        sample_trial(spec, state, lambda, 1, false, stream);
    if (any_pair_close(s, delta)) ++hits;
  }
  return binomial_proportion(hits, trials);
}

ProportionEstimate probe_noise_excess(
    const ProblemSpec& spec, std::span<const std::vector<double>> points,
    int resamplings, double delta, std::uint64_t trials,
    const SeedSpec& seed) {
  std::vector<std::string> errors = spec.validate();
  if (points.empty()) errors.push_back("points must be non-empty");
  for (const auto& pt : points) {
    if (pt.size() != static_cast<std::size_t>(spec.d)) {
      errors.push_back("every point must have dimension d");
      break;
    }
  }
  if (resamplings < 1) errors.push_back("resamplings must be at least 1");
  if (!(delta >= 0.0)) errors.push_back("delta must be non-negative");
  if (trials < 1) errors.push_back("trials must be at least 1");
  throw_joined(errors);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    GaussianStream stream(seed.child(t));
    bool hit = false;
    for (const auto& pt : points) {
      const double truth = expected_fitness(spec, pt);
      const double noisy = averaged_fitness(spec, pt, resamplings, stream);
      if (std::abs(noisy - truth) >= delta / 2.0) {
        hit = true;
        break;
      }
    }
    if (hit) ++hits;
  }
  return binomial_proportion(hits, trials);
}

ProportionEstimate probe_misranking(const ProblemSpec& spec,
                                    const SelectionState& state, int lambda,
                                    int resamplings, std::uint64_t trials,
                                    const SeedSpec& seed) {
  check_probe_inputs(state, lambda, 0.0, trials);
  std::vector<std::string> errors = spec.validate();
  if (state.center.size() != static_cast<std::size_t>(spec.d)) {
    errors.push_back("state center must have dimension d");
  }
  if (resamplings < 1) errors.push_back("resamplings must be at least 1");
  throw_joined(errors);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    GaussianStream stream(seed.child(t));
    const TrialSample s =
        sample_trial(spec, state, lambda, resamplings, true, stream);
    if (any_misranked(s)) ++hits;
  }
  return binomial_proportion(hits, trials);
}

GammaWindow admissible_gamma(double alpha, double alpha_prime, int d, int p,
                             double z) {
  std::vector<std::string> errors;
  if (d < 1) errors.push_back("d must be at least 1");
  if (p < 1) errors.push_back("p must be at least 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    errors.push_back("alpha must be positive and finite");
  }
  if (!(alpha_prime >= alpha) || !std::isfinite(alpha_prime)) {
    errors.push_back("alpha_prime must be finite and at least alpha");
  }
  if (!(z >= 0.0) || !std::isfinite(z)) {
    errors.push_back("z must be non-negative and finite");
  }
  throw_joined(errors);
  // As the thresholds shrink the gap ratio tends to zero, where the max
  // of ratio and ratio^{d/p} is governed by the smaller exponent.
  const double m = std::min(1.0, static_cast<double>(d) / p);
  GammaWindow window;
  window.lower =
      p * alpha_prime + static_cast<double>(d) * (alpha_prime - alpha) / m;
  window.upper = alpha * z * p / 2.0;
  return window;
}

std::vector<std::string> ProbeConfig::validate() const {
  std::vector<std::string> errors;
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    errors.push_back("gamma must be positive and finite");
  }
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) {
    errors.push_back("delta0 must be positive and finite");
  }
  if (trials < 100) errors.push_back("trials must be at least 100");
  if (iterations.empty()) {
    errors.push_back("iterations must be non-empty");
  } else {
    int prev = 0;
    for (const int n : iterations) {
      if (n < 1) {
        errors.push_back("iterations must be at least 1");
        break;
      }
      if (n <= prev) {
        errors.push_back("iterations must be strictly increasing");
        break;
      }
      prev = n;
    }
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    errors.push_back("alpha must be positive and finite");
  }
  if (!(alpha_prime >= alpha) || !std::isfinite(alpha_prime)) {
    errors.push_back("alpha_prime must be finite and at least alpha");
  }
  if (!(scale_c > 0.0) || !std::isfinite(scale_c)) {
    errors.push_back("scale_c must be positive and finite");
  }
  if (!(scale_v >= 0.0) || !std::isfinite(scale_v)) {
    errors.push_back("scale_v must be finite and non-negative");
  }
  if (source == StateSource::replay && trace.empty()) {
    errors.push_back("replay source requires a trace path");
  }
  return errors;
}

std::vector<SelectionState> synthetic_states(const ProbeConfig& cfg, int d) {
  throw_joined(cfg.validate());
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  std::vector<SelectionState> states;
  states.reserve(cfg.iterations.size());
  const double unit = 1.0 / std::sqrt(static_cast<double>(d));
  for (const int n : cfg.iterations) {
    const double decay = std::exp(-cfg.alpha * n);
    SelectionState state;
    state.center.assign(static_cast<std::size_t>(d),
                        cfg.scale_c * decay * unit);
    state.sigma = cfg.scale_v * decay;
    states.push_back(std::move(state));
  }
  return states;
}

MisrankReport probe_schedule(const ProblemSpec& spec, int lambda,
                             int resamplings, const ProbeConfig& cfg,
                             const SeedSpec& seed,
                             std::span<const SelectionState> states) {
  std::vector<std::string> errors = spec.validate();
  const std::vector<std::string> cfg_errors = cfg.validate();
  errors.insert(errors.end(), cfg_errors.begin(), cfg_errors.end());
  if (lambda < 1) errors.push_back("lambda must be at least 1");
  if (resamplings < 1) errors.push_back("resamplings must be at least 1");
  throw_joined(errors);

  std::vector<SelectionState> own_states;
  if (states.empty()) {
    if (cfg.source != StateSource::synthetic) {
      throw std::invalid_argument(
          "replay source requires explicitly supplied states");
    }
    own_states = synthetic_states(cfg, spec.d);
    states = own_states;
  }
  if (states.size() != cfg.iterations.size()) {
    throw std::invalid_argument(
        "states must align one-to-one with probed iterations");
  }
  for (const auto& state : states) {
    if (state.center.size() != static_cast<std::size_t>(spec.d)) {
      throw std::invalid_argument("state centers must have dimension d");
    }
  }

  MisrankReport report;
  report.gamma = cfg.gamma;
  report.delta0 = cfg.delta0;
  report.window = admissible_gamma(cfg.alpha, cfg.alpha_prime, spec.d,
                                   spec.p, spec.z);
  for (std::size_t idx = 0; idx < states.size(); ++idx) {
    const int n = cfg.iterations[idx];
    const SelectionState& state = states[idx];
    const double delta = cfg.delta0 * std::exp(-cfg.gamma * n);
    const SeedSpec node = seed.child(static_cast<std::uint64_t>(n));
    std::uint64_t close_hits = 0;
    std::uint64_t excess_hits = 0;
    std::uint64_t misrank_hits = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      GaussianStream stream(node.child(t));
      const TrialSample s =
          sample_trial(spec, state, lambda, resamplings, true, stream);
      // Shared samples keep the three counts coupled, so the union bound
      // holds for every trial, not just in expectation.
      if (any_pair_close(s, delta)) ++close_hits;
      if (any_noise_excess(s, delta)) ++excess_hits;
      if (any_misranked(s)) ++misrank_hits;
    }
    ProbePoint point;
    point.n = n;
    point.delta = delta;
    point.dist = spec.distance_to_optimum(state.center);
    point.sigma = state.sigma;
    const double fitness_scale = std::pow(point.dist, spec.p);
    point.gap_ratio = delta / fitness_scale;
    const double small_branch = point.gap_ratio;
    const double large_branch =
        std::pow(point.gap_ratio,
                 static_cast<double>(spec.d) / spec.p);
    point.m_branch = large_branch > small_branch
                         ? static_cast<double>(spec.d) / spec.p
                         : 1.0;
    point.pair_proximity = binomial_proportion(close_hits, cfg.trials);
    point.noise_excess = binomial_proportion(excess_hits, cfg.trials);
    point.misranking = binomial_proportion(misrank_hits, cfg.trials);
    report.misranking_sum += point.misranking.p_hat;
    report.points.push_back(std::move(point));
  }
  return report;
}

}  // namespace resample_es
