#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mc_oracles.hpp"
#include "resample_es/analysis.hpp"
#include "resample_es/probe.hpp"

using namespace resample_es;

namespace {

ProblemSpec sphere_spec(int d, int p, double z, NoiseKind kind) {
  ProblemSpec spec;
  spec.d = d;
  spec.p = p;
  spec.z = z;
  spec.noise = kind;
  return spec;
}

}  // namespace

TEST_CASE("interior proportion uses the normal width") {
  const ProportionEstimate est = binomial_proportion(50, 100);
  CHECK(est.p_hat == doctest::Approx(0.5));
  CHECK(est.half_width == doctest::Approx(0.0979981992270027).epsilon(1e-12));
  CHECK(est.successes == 50);
  CHECK(est.trials == 100);
}

TEST_CASE("boundary proportions use the exact one-sided bound") {
  const ProportionEstimate zero = binomial_proportion(0, 100);
  CHECK(zero.p_hat == 0.0);
  CHECK(zero.half_width == doctest::Approx(0.036217092).epsilon(1e-6));
  const ProportionEstimate full = binomial_proportion(100, 100);
  CHECK(full.p_hat == 1.0);
  CHECK(full.half_width == zero.half_width);
}

TEST_CASE("confidence half-width never exceeds the worst-case normal width") {
  for (const std::uint64_t trials : {100ULL, 1000ULL, 100000ULL}) {
    const double cap = 1.959963984540054 / (2.0 * std::sqrt(double(trials)));
    for (std::uint64_t s = 0; s <= trials; s += trials / 10) {
      const ProportionEstimate est = binomial_proportion(s, trials);
      CHECK(est.half_width <= cap + 1e-12);
      CHECK(est.p_hat >= 0.0);
      CHECK(est.p_hat <= 1.0);
    }
  }
}

TEST_CASE("proportion rejects empty or inconsistent counts") {
  CHECK_THROWS_AS(binomial_proportion(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(binomial_proportion(5, 4), std::invalid_argument);
}

TEST_CASE("a single offspring never forms a close pair") {
  SelectionState state;
  state.center = {0.3, -0.2};
  state.sigma = 0.5;
  const ProportionEstimate est =
      probe_pair_proximity(state, 1, 2, 1e9, 500, SeedSpec{7, {}});
  CHECK(est.successes == 0);
  CHECK(est.p_hat == 0.0);
}

TEST_CASE("an enormous threshold makes every pair close") {
  SelectionState state;
  state.center = {0.3, -0.2, 0.1};
  state.sigma = 0.5;
  const ProportionEstimate est =
      probe_pair_proximity(state, 4, 2, 1e12, 500, SeedSpec{7, {}});
  CHECK(est.successes == est.trials);
  CHECK(est.p_hat == 1.0);
}

TEST_CASE("pair proximity matches quadrature for folded gaussian gaps") {
  // Two offspring from N(0,1) around the optimum with p = 1 have exact
  // fitness |x|, so the gap is a difference of half-normals.
  SelectionState state;
  state.center = {0.0};
  state.sigma = 1.0;
  const double delta = 0.1;
  const std::uint64_t trials = 100000;
  const ProportionEstimate est =
      probe_pair_proximity(state, 2, 1, delta, trials, SeedSpec{11, {}});
  const double exact = oracle::folded_pair_gap_probability(delta);
  const double se = std::sqrt(exact * (1.0 - exact) / double(trials));
  CHECK(std::abs(est.p_hat - exact) <= 3.0 * se + 1e-6);
}

TEST_CASE("pair proximity is samplewise monotone in the threshold") {
  SelectionState state;
  state.center = {0.4, 0.1, -0.3};
  state.sigma = 0.3;
  const SeedSpec seed{23, {}};
  const ProportionEstimate narrow =
      probe_pair_proximity(state, 4, 2, 0.05, 5000, seed);
  const ProportionEstimate wide =
      probe_pair_proximity(state, 4, 2, 0.2, 5000, seed);
  CHECK(narrow.successes <= wide.successes);
}

TEST_CASE("noise excess matches the averaged gaussian tail at unit distance") {
  // At distance 1 the noise scale is 1, the average of Y draws has
  // standard deviation 1/sqrt(Y), and the excess event is a two-sided
  // tail at delta/2.
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  const std::vector<std::vector<double>> points = {{1.0, 0.0, 0.0}};
  const int resamplings = 4;
  const double delta = 1.0;
  const std::uint64_t trials = 100000;
  const ProportionEstimate est = probe_noise_excess(
      spec, points, resamplings, delta, trials, SeedSpec{31, {}});
  const double exact =
      2.0 * oracle::normal_tail(std::sqrt(double(resamplings)) * delta / 2.0);
  const double se = std::sqrt(exact * (1.0 - exact) / double(trials));
  CHECK(std::abs(est.p_hat - exact) <= 3.0 * se);
}

TEST_CASE("noise excess vanishes at the optimum when noise is relative") {
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  const std::vector<std::vector<double>> points = {{0.0, 0.0, 0.0}};
  const ProportionEstimate est =
      probe_noise_excess(spec, points, 2, 0.01, 400, SeedSpec{37, {}});
  CHECK(est.successes == 0);
}

TEST_CASE("noise excess is samplewise monotone in the threshold") {
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  const std::vector<std::vector<double>> points = {{0.8, 0.0, 0.0},
                                                   {0.0, 0.6, 0.0}};
  const SeedSpec seed{41, {}};
  const ProportionEstimate wide =
      probe_noise_excess(spec, points, 3, 0.1, 4000, seed);
  const ProportionEstimate narrow =
      probe_noise_excess(spec, points, 3, 0.4, 4000, seed);
  CHECK(narrow.successes <= wide.successes);
}

TEST_CASE("zero noise never misranks and never shows excess") {
  const ProblemSpec spec = sphere_spec(4, 2, 2.1, NoiseKind::zero);
  SelectionState state;
  state.center = {0.5, 0.5, 0.5, 0.5};
  state.sigma = 0.25;
  const ProportionEstimate mis =
      probe_misranking(spec, state, 4, 3, 600, SeedSpec{43, {}});
  CHECK(mis.successes == 0);
  const std::vector<std::vector<double>> points = {state.center};
  const ProportionEstimate excess =
      probe_noise_excess(spec, points, 3, 0.01, 600, SeedSpec{43, {}});
  CHECK(excess.successes == 0);
}

TEST_CASE("identical offspring cannot be misranked") {
  // With sigma = 0 every offspring sits on the center, exact values tie,
  // and ties are not misrankings.
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  SelectionState state;
  state.center = {0.4, 0.0, 0.3};
  state.sigma = 0.0;
  const ProportionEstimate est =
      probe_misranking(spec, state, 4, 2, 500, SeedSpec{47, {}});
  CHECK(est.successes == 0);
}

TEST_CASE("misranking becomes rarer with more resamplings") {
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  SelectionState state;
  state.center = {0.5, 0.0, 0.0};
  state.sigma = 0.25;
  const std::uint64_t trials = 20000;
  double prev = 1.0;
  double prev_hw = 0.0;
  for (const int y : {1, 4, 16}) {
    const ProportionEstimate est =
        probe_misranking(spec, state, 4, y, trials, SeedSpec{53, {}});
    CHECK(est.p_hat <= prev + prev_hw + est.half_width);
    prev = est.p_hat;
    prev_hw = est.half_width;
  }
}

TEST_CASE("misranking probes are deterministic in the seed") {
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  SelectionState state;
  state.center = {0.5, 0.1, -0.2};
  state.sigma = 0.2;
  const ProportionEstimate a =
      probe_misranking(spec, state, 4, 3, 2000, SeedSpec{59, {}});
  const ProportionEstimate b =
      probe_misranking(spec, state, 4, 3, 2000, SeedSpec{59, {}});
  CHECK(a.successes == b.successes);
  const ProportionEstimate c =
      probe_misranking(spec, state, 4, 3, 2000, SeedSpec{60, {}});
  CHECK(a.successes != c.successes);
}

TEST_CASE("the admissible decay window matches the reference setup") {
  const GammaWindow w = admissible_gamma(0.05, 0.05, 15, 2, 2.1);
  CHECK(w.lower == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(w.upper == doctest::Approx(0.105).epsilon(1e-12));
  CHECK_FALSE(w.empty());
}

TEST_CASE("the decay window closes at the scaling threshold") {
  CHECK(admissible_gamma(0.05, 0.05, 15, 2, 2.0).empty());
  CHECK(admissible_gamma(0.05, 0.05, 15, 2, 1.0).empty());
  CHECK(admissible_gamma(0.05, 0.05, 15, 2, 0.0).empty());
}

TEST_CASE("window emptiness agrees with the convergence threshold") {
  for (const double alpha : {0.03, 0.05}) {
    for (const double bump : {0.0, 0.01}) {
      const double alpha_prime = alpha + bump;
      for (const int d : {1, 2, 15}) {
        for (const int p : {1, 2, 4}) {
          const double threshold =
              theorem_threshold(p, d, alpha, alpha_prime);
          for (const double z :
               {0.5, 1.9, 2.0, 2.05, 2.2, 3.0, 6.0, 12.0}) {
            if (std::abs(z - threshold) < 1e-9) continue;
            const GammaWindow w = admissible_gamma(alpha, alpha_prime, d, p, z);
            CHECK(w.empty() == (z <= threshold));
          }
        }
      }
    }
  }
}

TEST_CASE("the window rejects invalid envelope rates") {
  CHECK_THROWS_AS(admissible_gamma(0.0, 0.05, 15, 2, 2.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(admissible_gamma(0.05, 0.04, 15, 2, 2.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(admissible_gamma(0.05, 0.05, 0, 2, 2.1),
                  std::invalid_argument);
}

TEST_CASE("synthetic states follow the log-linear schedule") {
  ProbeConfig cfg;
  cfg.alpha = 0.05;
  cfg.scale_c = 2.0;
  cfg.scale_v = 0.5;
  cfg.iterations = {10, 20, 40};
  const ProblemSpec spec = sphere_spec(15, 2, 2.1, NoiseKind::gaussian);
  const std::vector<SelectionState> states = synthetic_states(cfg, spec.d);
  REQUIRE(states.size() == 3);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double expected = 2.0 * std::exp(-0.05 * cfg.iterations[i]);
    CHECK(spec.distance_to_optimum(states[i].center) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(states[i].sigma ==
          doctest::Approx(0.25 * expected).epsilon(1e-12));
  }
}

TEST_CASE("probe config validation names each violation") {
  ProbeConfig cfg;
  cfg.gamma = 0.0;
  cfg.trials = 99;
  cfg.iterations = {10, 10};
  const std::vector<std::string> errors = cfg.validate();
  CHECK(errors.size() == 3);
  ProbeConfig replay;
  replay.source = StateSource::replay;
  CHECK(replay.validate().size() == 1);
  ProbeConfig good;
  CHECK(good.validate().empty());
}

TEST_CASE("schedule results respect the union bound trial by trial") {
  const ProblemSpec spec = sphere_spec(15, 2, 2.1, NoiseKind::gaussian);
  ProbeConfig cfg;
  cfg.gamma = 0.084;
  cfg.trials = 2000;
  cfg.iterations = {10, 20, 40};
  cfg.scale_v = 0.25;
  const MisrankReport report =
      probe_schedule(spec, 4, 12, cfg, SeedSpec{71, {}});
  REQUIRE(report.points.size() == 3);
  CHECK(report.window.lower == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(report.window.upper == doctest::Approx(0.105).epsilon(1e-12));
  double sum = 0.0;
  for (const ProbePoint& point : report.points) {
    CHECK(point.misranking.successes <=
          point.pair_proximity.successes + point.noise_excess.successes);
    CHECK(point.delta ==
          doctest::Approx(std::exp(-0.084 * point.n)).epsilon(1e-12));
    CHECK(point.dist ==
          doctest::Approx(std::exp(-0.05 * point.n)).epsilon(1e-12));
    sum += point.misranking.p_hat;
  }
  CHECK(report.misranking_sum == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("schedule is deterministic in the seed") {
  const ProblemSpec spec = sphere_spec(5, 2, 2.1, NoiseKind::gaussian);
  ProbeConfig cfg;
  cfg.trials = 500;
  cfg.iterations = {5, 10};
  const MisrankReport a = probe_schedule(spec, 4, 3, cfg, SeedSpec{83, {}});
  const MisrankReport b = probe_schedule(spec, 4, 3, cfg, SeedSpec{83, {}});
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].misranking.successes ==
          b.points[i].misranking.successes);
    CHECK(a.points[i].pair_proximity.successes ==
          b.points[i].pair_proximity.successes);
    CHECK(a.points[i].noise_excess.successes ==
          b.points[i].noise_excess.successes);
  }
}

TEST_CASE("relative noise shrinks misranking while additive noise does not") {
  // With z above the threshold the noise scale decays faster than the
  // fitness gaps; with z = 0 the additive noise overwhelms shrinking gaps.
  ProbeConfig cfg;
  cfg.gamma = 0.084;
  cfg.trials = 3000;
  cfg.iterations = {10, 80};
  cfg.scale_v = 0.25;
  const SeedSpec seed{89, {}};
  const ProblemSpec relative = sphere_spec(15, 2, 2.1, NoiseKind::gaussian);
  const MisrankReport shrinking = probe_schedule(relative, 4, 12, cfg, seed);
  const ProblemSpec additive = sphere_spec(15, 2, 0.0, NoiseKind::gaussian);
  const MisrankReport stuck = probe_schedule(additive, 4, 12, cfg, seed);
  const ProportionEstimate& early = shrinking.points.front().misranking;
  const ProportionEstimate& late = shrinking.points.back().misranking;
  CHECK(late.p_hat + late.half_width < early.p_hat - early.half_width);
  const ProportionEstimate& add_early = stuck.points.front().misranking;
  const ProportionEstimate& add_late = stuck.points.back().misranking;
  CHECK(add_late.p_hat + add_late.half_width >
        add_early.p_hat - add_early.half_width);
}

TEST_CASE("schedule rejects misaligned or missing states") {
  const ProblemSpec spec = sphere_spec(3, 2, 2.1, NoiseKind::gaussian);
  ProbeConfig cfg;
  cfg.trials = 200;
  cfg.iterations = {5, 10};
  std::vector<SelectionState> one(1);
  one[0].center = {0.1, 0.1, 0.1};
  CHECK_THROWS_AS(probe_schedule(spec, 4, 3, cfg, SeedSpec{1, {}}, one),
                  std::invalid_argument);
  ProbeConfig replay = cfg;
  replay.source = StateSource::replay;
  replay.trace = "some.csv";
  CHECK_THROWS_AS(probe_schedule(spec, 4, 3, replay, SeedSpec{1, {}}),
                  std::invalid_argument);
}
