#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "resample_es/analysis.hpp"
#include "resample_es/config.hpp"
#include "resample_es/probe.hpp"
#include "resample_es/strategy.hpp"

namespace resample_es {

// Output directory not writable, file not readable, and similar OS-level
// failures. The command-line front end maps this to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A trace or manifest file is missing, truncated, or fails its content
// hash. The message names the offending file; exit code 3.
struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a over the raw bytes; cheap integrity check against truncation and
// accidental edits, not an authentication mechanism.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

// Trace CSV: header `n,evals,dist,log_dist,sigma`, one row per iteration,
// floats with 17 significant digits so parsing restores them exactly.
std::string records_to_csv(std::span<const IterationRecord> records);
std::vector<IterationRecord> records_from_csv(std::string_view text);

std::string trace_filename(int resamplings, int run);

// Executes `runs` independent seeded runs, fanned out over `jobs` worker
// threads (0 means one per available core). Results are ordered by run
// index and do not depend on the worker count.
std::vector<RunTrace> run_batch(const ProblemSpec& problem,
                                const StrategyConfig& strategy, int runs,
                                std::uint64_t master_seed, int jobs);

// Writes the full artifact set into cfg.out_dir (empty means the working
// directory): config.ini, per-run trace CSVs for every resampling count in
// the sweep, aggregate median/mean curves, rates.json, and manifest.json
// (always written last, listing every other file with its content hash).
void run_experiment(const ExperimentConfig& cfg);

// Recomputes aggregates and rates.json from the traces on disk after
// verifying their hashes against the manifest.
void analyze_experiment(const std::filesystem::path& dir);

// Checks every manifest entry: returns one message per missing or
// hash-mismatched file, empty when the directory is intact.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

// Runs the misranking probe schedule described by cfg.probe and writes
// probe_report.json into cfg.out_dir. The replay source reconstructs the
// parent state at each probed iteration from a trace's distance and
// step-size columns; the probe is isotropic, so the direction of the
// stored center is immaterial.
MisrankReport probe_experiment(const ExperimentConfig& cfg);

// Emits plot-ready tables (plot_median.csv, plot_mean.csv: evaluations,
// then one log-distance column per resampling count, blank until a curve's
// first point) plus self-contained SVG renderings, after verifying trace
// hashes. The manifest is rewritten with the plot files included.
void emit_plot_data(const std::filesystem::path& dir);

}  // namespace resample_es
