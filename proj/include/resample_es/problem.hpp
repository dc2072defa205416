#pragma once

#include <span>
#include <string>
#include <vector>

#include "resample_es/rng.hpp"

namespace resample_es {

enum class NoiseKind { gaussian, uniform, zero };

// Sphere objective with distance-scaled noise:
//
//   f(x) = ||x - x*||^p + ||x - x*||^(p z / 2) * eta
//
// where eta is a zero-mean draw from noise_kind. z = 0 gives additive
// noise of constant variance, z = 2 multiplicative; larger z makes the
// noise vanish faster than the fitness signal near the optimum.
struct ProblemSpec {
  int d = 15;
  int p = 2;
  double z = 2.1;
  NoiseKind noise = NoiseKind::gaussian;
  double uniform_halfwidth = 1.0;   // a in uniform[-a, a]
  std::vector<double> optimum{};    // empty means the origin

  // Violation messages; empty when the spec is usable.
  [[nodiscard]] std::vector<std::string> validate() const;

  [[nodiscard]] double noise_variance() const;

  // Euclidean distance to the optimum, scaled internally so that
  // coordinates near the extremes of double range do not square to
  // infinity or zero.
  [[nodiscard]] double distance_to_optimum(std::span<const double> x) const;
};

std::string to_string(NoiseKind kind);

// ||x - x*||^p, exact.
double expected_fitness(const ProblemSpec& spec, std::span<const double> x);

// One noisy evaluation; consumes exactly one noise draw from the stream
// (none for NoiseKind::zero, which has no entropy).
double sample_fitness(const ProblemSpec& spec, std::span<const double> x,
                      GaussianStream& stream);

// Mean of `resamplings` independent noisy evaluations.
double averaged_fitness(const ProblemSpec& spec, std::span<const double> x,
                        int resamplings, GaussianStream& stream);

}  // namespace resample_es
