#include "resample_es/strategy.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace resample_es {
namespace {

// Draw roles under one (run, iteration, offspring) node.
constexpr std::uint64_t kRoleSigma = 0;
constexpr std::uint64_t kRoleX = 1;
constexpr std::uint64_t kRoleNoise = 2;

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::diverged: return "diverged";
    case RunStatus::underflowed: return "underflowed";
  }
  return "?";
}

std::vector<std::string> StrategyConfig::validate(
    const ProblemSpec& spec) const {
  std::vector<std::string> bad;
  if (mu < 1) bad.push_back("strategy.mu must be >= 1");
  if (lambda < mu) bad.push_back("strategy.lambda must be >= mu");
  if (resamplings < 1) bad.push_back("strategy.Y must be >= 1");
  if (sigma0 <= 0.0) bad.push_back("strategy.sigma0 must be > 0");
  if (!(x0_scale > 0.0) || !std::isfinite(x0_scale)) {
    bad.push_back("strategy.init scale must be a positive finite real");
  }
  if (tau && *tau <= 0.0) bad.push_back("strategy.tau must be > 0");
  if (mu >= 1 && lambda >= mu &&
      budget < static_cast<std::uint64_t>(lambda) *
                   static_cast<std::uint64_t>(std::max(resamplings, 1))) {
    bad.push_back("strategy.budget must cover one generation (lambda * Y)");
  }
  if (!x0.empty() && x0.size() != static_cast<std::size_t>(spec.d)) {
    bad.push_back("strategy.init point length must equal problem.d");
  }
  return bad;
}

double StrategyConfig::effective_tau(int d) const {
  return tau ? *tau : 1.0 / (2.0 * static_cast<double>(d));
}

std::vector<double> StrategyConfig::initial_point(int d) const {
  if (!x0.empty()) return x0;
  return std::vector<double>(
      static_cast<std::size_t>(d),
      x0_scale / std::sqrt(static_cast<double>(d)));
}

EsState make_initial_state(const ProblemSpec& spec,
                           const StrategyConfig& cfg) {
  EsState state;
  state.parents.assign(static_cast<std::size_t>(cfg.mu),
                       Individual{cfg.initial_point(spec.d), cfg.sigma0});
  return state;
}

Individual mutate(const Individual& parent, double tau,
                  GaussianStream& sigma_stream, GaussianStream& x_stream) {
  Individual child;
  child.sigma = parent.sigma * std::exp(tau * sigma_stream.gaussian());
  child.x.resize(parent.x.size());
  for (std::size_t i = 0; i < parent.x.size(); ++i) {
    child.x[i] = parent.x[i] + child.sigma * x_stream.gaussian();
  }
  return child;
}

std::vector<std::size_t> rank_ascending(std::span<const double> values,
                                        std::size_t keep) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  order.resize(std::min(keep, order.size()));
  return order;
}

IterationOutcome es_iteration(EsState& state, const ProblemSpec& spec,
                              const StrategyConfig& cfg,
                              const SeedSpec& run_seed) {
  const std::uint64_t per_generation =
      static_cast<std::uint64_t>(cfg.lambda) *
      static_cast<std::uint64_t>(cfg.resamplings);
  if (state.evals + per_generation > cfg.budget) {
    throw std::logic_error("es_iteration: remaining budget below lambda * Y");
  }
  if (state.parents.size() != static_cast<std::size_t>(cfg.mu)) {
    throw std::logic_error("es_iteration: state does not hold mu parents");
  }

  const std::uint64_t n = state.iteration + 1;
  const double tau = cfg.effective_tau(spec.d);
  const SeedSpec iter_seed = run_seed.child(n);

  std::vector<Individual> offspring;
  offspring.reserve(static_cast<std::size_t>(cfg.lambda));
  IterationOutcome out;
  out.offspring_values.reserve(static_cast<std::size_t>(cfg.lambda));

  for (int j = 1; j <= cfg.lambda; ++j) {
    const Individual& parent =
        state.parents[static_cast<std::size_t>((j - 1) % cfg.mu)];
    const SeedSpec node = iter_seed.child(static_cast<std::uint64_t>(j));
    GaussianStream sigma_stream(node.child(kRoleSigma));
    GaussianStream x_stream(node.child(kRoleX));
    GaussianStream noise_stream(node.child(kRoleNoise));
    Individual child = mutate(parent, tau, sigma_stream, x_stream);
    out.offspring_values.push_back(
        averaged_fitness(spec, child.x, cfg.resamplings, noise_stream));
    offspring.push_back(std::move(child));
  }

  out.selected = rank_ascending(out.offspring_values,
                                static_cast<std::size_t>(cfg.mu));
  std::vector<Individual> parents;
  parents.reserve(out.selected.size());
  for (std::size_t idx : out.selected) {
    parents.push_back(std::move(offspring[idx]));
  }
  state.parents = std::move(parents);
  state.iteration = n;
  state.evals += per_generation;

  const Individual& best = state.parents.front();
  out.record.n = n;
  out.record.evals = state.evals;
  out.record.dist = spec.distance_to_optimum(best.x);
  out.record.log_dist = out.record.dist > 0.0
                            ? std::log(out.record.dist)
                            : -std::numeric_limits<double>::infinity();
  out.record.sigma = best.sigma;
  return out;
}

RunTrace run_es(const ProblemSpec& spec, const StrategyConfig& cfg,
                std::uint64_t master_seed, std::uint64_t run_index) {
  {
    auto bad = spec.validate();
    auto more = cfg.validate(spec);
    bad.insert(bad.end(), more.begin(), more.end());
    if (!bad.empty()) {
      std::string joined = "run_es: invalid configuration:";
      for (const auto& b : bad) joined += " " + b + ";";
      throw std::invalid_argument(joined);
    }
  }

  RunTrace trace;
  trace.problem = spec;
  trace.config = cfg;
  trace.master_seed = master_seed;
  trace.run_index = run_index;

  const SeedSpec run_seed = SeedSpec{master_seed, {}}.child(run_index);
  EsState state = make_initial_state(spec, cfg);
  const std::uint64_t per_generation =
      static_cast<std::uint64_t>(cfg.lambda) *
      static_cast<std::uint64_t>(cfg.resamplings);

  while (state.evals + per_generation <= cfg.budget) {
    IterationOutcome out = es_iteration(state, spec, cfg, run_seed);
    trace.records.push_back(out.record);
    const double dist = out.record.dist;
    const double fitness_scale = std::pow(dist, spec.p);
    if (dist > kDivergedDist || !std::isfinite(fitness_scale)) {
      trace.status = RunStatus::diverged;
      break;
    }
    // Below DBL_MIN the fitness value dist^p quantizes to subnormals and
    // ranking degenerates, so the run stops as underflowed even when dist
    // itself is still representable.
    if (dist < kUnderflowDist || out.record.sigma < kUnderflowSigma ||
        fitness_scale < DBL_MIN) {
      trace.status = RunStatus::underflowed;
      break;
    }
  }
  return trace;
}

}  // namespace resample_es
