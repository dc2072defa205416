#include "resample_es/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resample_es {
namespace {

// SplitMix64 finalizer (Steele, Lea, Flood 2014): bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Combine the running hash with one path component. The shift-xor spread
// keeps folds of different components at the same depth from commuting.
constexpr std::uint64_t fold(std::uint64_t h, std::uint64_t component) {
  return mix64(h ^ (component + kGolden + (h << 6) + (h >> 2)));
}

constexpr double kWordScale = 0x1.0p-53;  // 2^-53, maps 53 bits onto [0,1)

}  // namespace

SeedSpec SeedSpec::child(std::uint64_t component) const {
  SeedSpec c{master_seed, stream_path};
  c.stream_path.push_back(component);
  return c;
}

std::uint64_t SeedSpec::leaf_seed() const {
  std::uint64_t h = mix64(master_seed + kGolden);
  for (std::uint64_t part : stream_path) h = fold(h, part);
  return h;
}

GaussianStream::GaussianStream(const SeedSpec& seed) {
  // SplitMix64 sequence expands the leaf into the four engine words, per
  // the xoshiro authors' seeding recommendation.
  std::uint64_t s = seed.leaf_seed();
  for (auto& word : state_) {
    s += kGolden;
    word = mix64(s);
  }
}

std::uint64_t GaussianStream::next_word() {
  const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

double GaussianStream::uniform() {
  ++draws_;
  return static_cast<double>(next_word() >> 11) * kWordScale;
}

double GaussianStream::gaussian() {
  ++draws_;
  // u1 lies in (0, 1], keeping the logarithm finite.
  const double u1 = 1.0 - static_cast<double>(next_word() >> 11) * kWordScale;
  const double u2 = static_cast<double>(next_word() >> 11) * kWordScale;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

void GaussianStream::gaussian_fill(std::span<double> out) {
  for (double& v : out) v = gaussian();
}

std::vector<double> GaussianStream::gaussian_vector(std::size_t dim) {
  if (dim == 0) {
    throw std::invalid_argument("gaussian_vector: dimension must be >= 1");
  }
  std::vector<double> out(dim);
  gaussian_fill(out);
  return out;
}

}  // namespace resample_es
