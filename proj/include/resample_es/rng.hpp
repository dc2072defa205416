#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace resample_es {

// Hierarchical stream address: a master seed plus a path of non-negative
// integers (conventionally run index, iteration, individual, draw role).
// Distinct paths map to engine states with no shared words, so streams for
// different runs, individuals, or roles can be created and consumed
// independently, in any order, on any thread.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> stream_path{};

  // Address of the sub-stream obtained by appending one path component.
  [[nodiscard]] SeedSpec child(std::uint64_t component) const;

  // Keyed hash of (master_seed, stream_path): a SplitMix64-style
  // combine/finalize chain, one fold per path component.
  [[nodiscard]] std::uint64_t leaf_seed() const;
};

// Deterministic variate source for one stream address.
//
// Engine: xoshiro256** seeded by SplitMix64 expansion of the leaf seed.
// Gaussian draws use the Box-Muller transform, cosine branch only; every
// gaussian consumes exactly two engine words, every uniform exactly one.
// These algorithms are frozen: traces produced by a given seed must replay
// identically under later versions on the same platform.
//
// Not thread-safe; create one stream per concurrent consumer.
class GaussianStream {
 public:
  explicit GaussianStream(const SeedSpec& seed);

  // Uniform draw in [0, 1) at 53-bit resolution.
  double uniform();

  // One standard normal variate.
  double gaussian();

  void gaussian_fill(std::span<double> out);

  // dim >= 1, else std::invalid_argument. The first coordinate equals the
  // gaussian() draw the stream would have produced at the same position.
  [[nodiscard]] std::vector<double> gaussian_vector(std::size_t dim);

  // Scalar variates served so far (uniform and gaussian draws alike).
  [[nodiscard]] std::uint64_t draw_count() const { return draws_; }

 private:
  std::uint64_t next_word();

  std::array<std::uint64_t, 4> state_{};
  std::uint64_t draws_ = 0;
};

}  // namespace resample_es
