#include "resample_es/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace resample_es {
namespace {

double noise_draw(const ProblemSpec& spec, GaussianStream& stream) {
  switch (spec.noise) {
    case NoiseKind::gaussian:
      return stream.gaussian();
    case NoiseKind::uniform:
      return spec.uniform_halfwidth * (2.0 * stream.uniform() - 1.0);
    case NoiseKind::zero:
      return 0.0;
  }
  throw std::logic_error("unreachable noise kind");
}

void require_dimension(const ProblemSpec& spec, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(spec.d)) {
    throw std::invalid_argument("point dimension does not match problem");
  }
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::zero: return "zero";
  }
  return "?";
}

std::vector<std::string> ProblemSpec::validate() const {
  std::vector<std::string> bad;
  if (d < 1) bad.push_back("problem.d must be >= 1");
  if (p < 1) bad.push_back("problem.p must be >= 1");
  if (z < 0.0) bad.push_back("problem.z must be >= 0");
  if (noise == NoiseKind::uniform && uniform_halfwidth <= 0.0) {
    bad.push_back("problem.noise uniform halfwidth must be > 0");
  }
  if (!optimum.empty() && optimum.size() != static_cast<std::size_t>(d)) {
    bad.push_back("problem.optimum length must equal d");
  }
  return bad;
}

double ProblemSpec::noise_variance() const {
  switch (noise) {
    case NoiseKind::gaussian: return 1.0;
    case NoiseKind::uniform:
      return uniform_halfwidth * uniform_halfwidth / 3.0;
    case NoiseKind::zero: return 0.0;
  }
  return 0.0;
}

double ProblemSpec::distance_to_optimum(std::span<const double> x) const {
  require_dimension(*this, x);
  double scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = optimum.empty() ? x[i] : x[i] - optimum[i];
    scale = std::max(scale, std::abs(c));
  }
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale)) return scale;
  double sumsq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = (optimum.empty() ? x[i] : x[i] - optimum[i]) / scale;
    sumsq += c * c;
  }
  return scale * std::sqrt(sumsq);
}

double expected_fitness(const ProblemSpec& spec, std::span<const double> x) {
  return std::pow(spec.distance_to_optimum(x), spec.p);
}

double sample_fitness(const ProblemSpec& spec, std::span<const double> x,
                      GaussianStream& stream) {
  const double r = spec.distance_to_optimum(x);
  const double eta = noise_draw(spec, stream);
  // pow(0,0) = 1 keeps z = 0 purely additive even at the optimum.
  return std::pow(r, spec.p) + std::pow(r, spec.p * spec.z / 2.0) * eta;
}

double averaged_fitness(const ProblemSpec& spec, std::span<const double> x,
                        int resamplings, GaussianStream& stream) {
  if (resamplings < 1) {
    throw std::invalid_argument("averaged_fitness: resamplings must be >= 1");
  }
  // Averaging identical values is a no-op; one evaluation keeps the mean
  // bitwise equal to the exact value instead of accumulating rounding.
  if (spec.noise == NoiseKind::zero) return sample_fitness(spec, x, stream);
  double sum = 0.0;
  for (int i = 0; i < resamplings; ++i) sum += sample_fitness(spec, x, stream);
  return sum / static_cast<double>(resamplings);
}

}  // namespace resample_es
