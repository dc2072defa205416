#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "resample_es/probe.hpp"
#include "resample_es/problem.hpp"
#include "resample_es/strategy.hpp"

namespace resample_es {

// Full description of one experiment: the objective, the strategy, the
// probe setup, and the batch bookkeeping. Defaults reproduce the reference
// setup (d=15, p=2, z=2.1, mu=2, lambda=4, Y=12, budget 500000, 50 runs).
struct ExperimentConfig {
  ProblemSpec problem{};
  StrategyConfig strategy{};
  ProbeConfig probe{};
  int runs = 50;
  std::uint64_t seed = 42;
  std::vector<int> y_sweep{};  // empty: just the configured resampling count
  int jobs = 0;                // 0: one worker per available core
  std::string out_dir{};       // empty: resolved via flag, env var, then cwd

  [[nodiscard]] std::vector<std::string> validate() const;
};

ExperimentConfig default_experiment();

// Text format: [problem] / [strategy] / [experiment] / [probe] sections of
// `key = value` lines. '#' and ';' start comments (so paths must avoid
// them), vectors are space- or comma-separated, and the sentinels `origin`,
// `unit-vector`, `default`, and `none` select the built-in defaults for
// optimum, init, tau, and y_sweep. `init = unit-vector:<scale>` places the
// start point at distance <scale> along the all-ones direction. Unknown
// sections or keys are errors; every violation is reported, prefixed with
// its line number.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::string& path);

// Canonical full-form rendering: every key of every section, doubles with
// 17 significant digits. parse_config(serialize_config(c)) restores every
// field and re-serializing reproduces the text byte for byte.
std::string serialize_config(const ExperimentConfig& cfg);

// Applies one `section.key` override with the parser's key set and value
// syntax. Throws std::invalid_argument on unknown keys or bad values.
void apply_override(ExperimentConfig& cfg, std::string_view dotted_key,
                    std::string_view value);

}  // namespace resample_es
