#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resample_es/problem.hpp"
#include "resample_es/rng.hpp"

namespace resample_es {

// (mu, lambda) selection with self-adaptive step-size: offspring j mutates
// parent ((j-1) mod mu) + 1, every offspring is scored by the mean of
// `resamplings` noisy evaluations, and the mu best offspring replace the
// parents outright. Parents never survive.
struct StrategyConfig {
  int mu = 2;
  int lambda = 4;
  int resamplings = 12;            // config key: Y
  double sigma0 = 1e-5;
  std::optional<double> tau{};     // step-size learning rate; default 1/(2d)
  std::uint64_t budget = 500'000;  // total fitness evaluations
  std::vector<double> x0{};        // empty: all-ones scaled to x0_scale norm
  // Starting distance when x0 is empty. Selection near the optimum must beat
  // noise whose relative size grows with distance (z > 2); starting at unit
  // distance with a typical resampling count leaves no step-size with
  // positive expected progress, so runs stall. 1e-4 starts every default-Y
  // run inside the converging region with sigma0 at ~1.5 normalized steps.
  double x0_scale = 1e-4;

  [[nodiscard]] std::vector<std::string> validate(const ProblemSpec&) const;
  [[nodiscard]] double effective_tau(int d) const;
  [[nodiscard]] std::vector<double> initial_point(int d) const;
};

struct IterationRecord {
  std::uint64_t n = 0;      // 1-based iteration index
  std::uint64_t evals = 0;  // cumulative evaluations, n * lambda * resamplings
  double dist = 0.0;        // distance of the best parent to the optimum
  double log_dist = 0.0;    // natural log; -infinity when dist is exactly 0
  double sigma = 0.0;       // step-size of the best parent
};

enum class RunStatus { completed, diverged, underflowed };

std::string to_string(RunStatus status);

struct RunTrace {
  ProblemSpec problem{};
  StrategyConfig config{};
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;
  RunStatus status = RunStatus::completed;
  std::vector<IterationRecord> records{};
};

struct Individual {
  std::vector<double> x;
  double sigma = 1.0;
};

struct EsState {
  std::vector<Individual> parents;  // size mu, best first
  std::uint64_t iteration = 0;      // completed iterations
  std::uint64_t evals = 0;          // evaluations consumed
};

// A run is stopped once the numbers stop meaning anything: the distance
// beyond kDivergedDist (or a non-finite fitness power) marks divergence;
// distance, step-size, or the fitness value dist^p sinking below double
// resolution marks underflow.
inline constexpr double kDivergedDist = 1e150;
inline constexpr double kUnderflowDist = 1e-300;
inline constexpr double kUnderflowSigma = 1e-300;

EsState make_initial_state(const ProblemSpec&, const StrategyConfig&);

// child_sigma = parent_sigma * exp(tau * g); child_x = parent_x +
// child_sigma * G. The step-size is drawn first and scales the move.
Individual mutate(const Individual& parent, double tau,
                  GaussianStream& sigma_stream, GaussianStream& x_stream);

// Indices of the `keep` smallest values, ascending, ties broken by the
// lower index (stable order).
std::vector<std::size_t> rank_ascending(std::span<const double> values,
                                        std::size_t keep);

struct IterationOutcome {
  IterationRecord record{};
  std::vector<double> offspring_values{};  // noisy averaged, offspring order
  std::vector<std::size_t> selected{};     // survivor indices, rank order
};

// One generation. Draw streams are keyed by (run, iteration, offspring,
// role), so two configs differing only in `resamplings` see identical
// mutation draws. Throws when the remaining budget cannot pay for a full
// generation.
IterationOutcome es_iteration(EsState& state, const ProblemSpec& spec,
                              const StrategyConfig& cfg,
                              const SeedSpec& run_seed);

RunTrace run_es(const ProblemSpec& spec, const StrategyConfig& cfg,
                std::uint64_t master_seed, std::uint64_t run_index);

}  // namespace resample_es
