#include "resample_es/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "artifact_io.hpp"

namespace resample_es {

namespace {

using nlohmann::json;

constexpr double kBurnInFraction = 0.1;
constexpr const char* kSoftwareVersion = "0.1.0";

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out << "; ";
    out << parts[i];
  }
  return out.str();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
bool parse_field(std::string_view s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto result = std::from_chars(first, last, out);
  return result.ec == std::errc{} && result.ptr == last;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t half = n / 2;
  std::nth_element(values.begin(), values.begin() + half, values.end());
  const double upper = values[half];
  if (n % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + half);
  // Sum form keeps the midpoint exact when one member is -infinity.
  return (lower + upper) / 2.0;
}

double quantile_of(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

json proportion_json(const ProportionEstimate& est) {
  return json{{"p_hat", est.p_hat},
              {"half_width", est.half_width},
              {"successes", est.successes},
              {"trials", est.trials}};
}

std::string curve_to_csv(const AggregateCurve& curve) {
  std::ostringstream out;
  out << "evals,log_dist\n";
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
    out << format_double(curve.abscissa[i]) << ","
        << format_double(curve.ordinate[i]) << "\n";
  }
  return out.str();
}

std::string aggregate_filename(Statistic statistic, int y) {
  std::ostringstream out;
  out << "aggregate_" << to_string(statistic) << "_Y" << y << ".csv";
  return out.str();
}

// Per-Y rate summary for rates.json: per-run fits on both abscissas, their
// medians and quartiles, outcome counts, and the per-evaluation rate
// implied by the fitted per-iteration decay.
json rates_entry(const std::vector<RunTrace>& traces, int y, int lambda) {
  json slopes_iter = json::array();
  json slopes_eval = json::array();
  json r2_values = json::array();
  std::vector<double> iter_valid;
  std::vector<double> eval_valid;
  std::vector<double> r2_valid;
  std::vector<double> final_vals;
  int diverged = 0;
  int underflowed = 0;
  for (const RunTrace& trace : traces) {
    if (trace.status == RunStatus::diverged) ++diverged;
    if (trace.status == RunStatus::underflowed) ++underflowed;
    if (!trace.records.empty()) {
      final_vals.push_back(trace.records.back().log_dist);
    }
    try {
      const RateEstimate fit =
          estimate_rate(trace, RateScale::linear_in_n,
                        RateAbscissa::iterations, kBurnInFraction);
      slopes_iter.push_back(fit.slope);
      iter_valid.push_back(fit.slope);
      r2_values.push_back(fit.r_squared);
      r2_valid.push_back(fit.r_squared);
    } catch (const std::invalid_argument&) {
      slopes_iter.push_back(nullptr);
      r2_values.push_back(nullptr);
    }
    try {
      const RateEstimate fit =
          estimate_rate(trace, RateScale::linear_in_n,
                        RateAbscissa::evaluations, kBurnInFraction);
      slopes_eval.push_back(fit.slope);
      eval_valid.push_back(fit.slope);
    } catch (const std::invalid_argument&) {
      slopes_eval.push_back(nullptr);
    }
  }
  json entry;
  entry["y"] = y;
  entry["runs"] = traces.size();
  entry["completed"] =
      static_cast<int>(traces.size()) - diverged - underflowed;
  entry["diverged"] = diverged;
  entry["underflowed"] = underflowed;
  entry["slope_per_iteration"] = {
      {"runs", slopes_iter},
      {"median", iter_valid.empty() ? json(nullptr)
                                    : json(median_of(iter_valid))},
      {"q25", iter_valid.empty() ? json(nullptr)
                                 : json(quantile_of(iter_valid, 0.25))},
      {"q75", iter_valid.empty() ? json(nullptr)
                                 : json(quantile_of(iter_valid, 0.75))}};
  entry["slope_per_evaluation"] = {
      {"runs", slopes_eval},
      {"median", eval_valid.empty() ? json(nullptr)
                                    : json(median_of(eval_valid))}};
  entry["r_squared"] = {
      {"runs", r2_values},
      {"median",
       r2_valid.empty() ? json(nullptr) : json(median_of(r2_valid))}};
  entry["final_log_dist"] = {
      {"median",
       final_vals.empty() ? json(nullptr) : json(median_of(final_vals))},
      {"mean", final_vals.empty()
                   ? json(nullptr)
                   : json(std::accumulate(final_vals.begin(),
                                          final_vals.end(), 0.0) /
                          static_cast<double>(final_vals.size()))}};
  if (!iter_valid.empty() && median_of(iter_valid) < 0.0) {
    const double alpha_hat = -median_of(iter_valid);
    entry["alpha_hat"] = alpha_hat;
    entry["corollary_per_evaluation"] = corollary_rate(alpha_hat, lambda, y);
  } else {
    entry["alpha_hat"] = nullptr;
    entry["corollary_per_evaluation"] = nullptr;
  }
  return entry;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string records_to_csv(std::span<const IterationRecord> records) {
  std::ostringstream out;
  out << "n,evals,dist,log_dist,sigma\n";
  for (const IterationRecord& rec : records) {
    out << rec.n << "," << rec.evals << "," << format_double(rec.dist) << ","
        << format_double(rec.log_dist) << "," << format_double(rec.sigma)
        << "\n";
  }
  return out.str();
}

std::vector<IterationRecord> records_from_csv(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != "n,evals,dist,log_dist,sigma") {
    throw std::invalid_argument("missing or wrong trace header");
  }
  std::vector<IterationRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string_view> fields = split(lines[i], ',');
    IterationRecord rec;
    if (fields.size() != 5 || !parse_field(fields[0], rec.n) ||
        !parse_field(fields[1], rec.evals) ||
        !parse_field(fields[2], rec.dist) ||
        !parse_field(fields[3], rec.log_dist) ||
        !parse_field(fields[4], rec.sigma)) {
      throw std::invalid_argument("malformed trace row " + std::to_string(i));
    }
    records.push_back(rec);
  }
  return records;
}

std::string trace_filename(int resamplings, int run) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "trace_Y%d_run%03d.csv", resamplings, run);
  return buf;
}

std::vector<RunTrace> run_batch(const ProblemSpec& problem,
                                const StrategyConfig& strategy, int runs,
                                std::uint64_t master_seed, int jobs) {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  std::vector<std::string> errors = problem.validate();
  const std::vector<std::string> strategy_errors = strategy.validate(problem);
  errors.insert(errors.end(), strategy_errors.begin(), strategy_errors.end());
  if (!errors.empty()) throw std::invalid_argument(join(errors));

  int workers = jobs > 0 ? jobs
                         : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, runs);

  std::vector<RunTrace> results(static_cast<std::size_t>(runs));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const int index = next.fetch_add(1, std::memory_order_relaxed);
      if (index >= runs) break;
      try {
        results[static_cast<std::size_t>(index)] =
            run_es(problem, strategy, master_seed,
                   static_cast<std::uint64_t>(index));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

namespace detail {

json load_manifest(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / kManifestName;
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError&) {
    throw TraceError("missing manifest: " + path.string());
  }
  json manifest = json::parse(text, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object() ||
      manifest.value("format", "") != kManifestFormat) {
    throw TraceError("corrupt manifest: " + path.string());
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& dir, const json& manifest) {
  write_text_file(dir / kManifestName, manifest.dump(2) + "\n");
}

json file_entry(const std::string& name, const std::string& kind,
                std::string_view content) {
  return json{
      {"path", name}, {"kind", kind}, {"fnv1a64", fnv1a64_hex(content)}};
}

TraceSet load_traces(const std::filesystem::path& dir, const json& manifest) {
  TraceSet set;
  try {
    set.config = parse_config(manifest.at("config_ini").get<std::string>());
  } catch (const std::exception& e) {
    throw TraceError(std::string("manifest carries an unusable config: ") +
                     e.what());
  }
  for (const json& entry : manifest.at("files")) {
    if (entry.value("kind", "") != "trace") continue;
    const std::string name = entry.at("path").get<std::string>();
    const std::filesystem::path path = dir / name;
    std::string text;
    try {
      text = read_text_file(path);
    } catch (const IoError&) {
      throw TraceError("missing trace: " + path.string());
    }
    if (fnv1a64_hex(text) != entry.at("fnv1a64").get<std::string>()) {
      throw TraceError("hash mismatch: " + path.string());
    }
    RunTrace trace;
    trace.problem = set.config.problem;
    trace.config = set.config.strategy;
    trace.config.resamplings = entry.at("y").get<int>();
    trace.master_seed = set.config.seed;
    trace.run_index = entry.at("run").get<std::uint64_t>();
    const std::string status = entry.value("status", "completed");
    trace.status = status == "diverged"     ? RunStatus::diverged
                   : status == "underflowed" ? RunStatus::underflowed
                                             : RunStatus::completed;
    try {
      trace.records = records_from_csv(text);
    } catch (const std::invalid_argument& e) {
      throw TraceError("corrupt trace " + path.string() + ": " + e.what());
    }
    set.by_y[trace.config.resamplings].push_back(std::move(trace));
  }
  for (auto& [y, traces] : set.by_y) {
    std::sort(traces.begin(), traces.end(),
              [](const RunTrace& a, const RunTrace& b) {
                return a.run_index < b.run_index;
              });
  }
  return set;
}

}  // namespace detail

void run_experiment(const ExperimentConfig& cfg) {
  const std::vector<std::string> errors = cfg.validate();
  if (!errors.empty()) throw std::invalid_argument(join(errors));
  const std::filesystem::path dir =
      cfg.out_dir.empty() ? std::filesystem::path(".")
                          : std::filesystem::path(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  }
  const std::string config_text = serialize_config(cfg);
  write_text_file(dir / "config.ini", config_text);

  std::vector<int> y_values = cfg.y_sweep;
  if (y_values.empty()) y_values.push_back(cfg.strategy.resamplings);

  json files = json::array();
  files.push_back(detail::file_entry("config.ini", "config", config_text));
  json per_y = json::array();
  for (const int y : y_values) {
    StrategyConfig strategy = cfg.strategy;
    strategy.resamplings = y;
    const std::vector<RunTrace> traces =
        run_batch(cfg.problem, strategy, cfg.runs, cfg.seed, cfg.jobs);
    for (int run = 0; run < cfg.runs; ++run) {
      const RunTrace& trace = traces[static_cast<std::size_t>(run)];
      const std::string csv = records_to_csv(trace.records);
      const std::string name = trace_filename(y, run);
      write_text_file(dir / name, csv);
      json entry = detail::file_entry(name, "trace", csv);
      entry["y"] = y;
      entry["run"] = run;
      entry["status"] = to_string(trace.status);
      files.push_back(std::move(entry));
    }
    for (const Statistic statistic : {Statistic::median, Statistic::mean}) {
      const AggregateCurve curve = aggregate_runs(traces, statistic);
      const std::string csv = curve_to_csv(curve);
      const std::string name = aggregate_filename(statistic, y);
      write_text_file(dir / name, csv);
      json entry = detail::file_entry(name, "aggregate", csv);
      entry["y"] = y;
      entry["statistic"] = to_string(statistic);
      files.push_back(std::move(entry));
    }
    per_y.push_back(rates_entry(traces, y, cfg.strategy.lambda));
  }

  json rates;
  rates["lambda"] = cfg.strategy.lambda;
  rates["burn_in_fraction"] = kBurnInFraction;
  rates["per_y"] = per_y;
  const std::string rates_text = rates.dump(2) + "\n";
  write_text_file(dir / "rates.json", rates_text);
  files.push_back(detail::file_entry("rates.json", "rates", rates_text));

  json manifest;
  manifest["format"] = detail::kManifestFormat;
  manifest["version"] = kSoftwareVersion;
  manifest["seed"] = cfg.seed;
  manifest["runs"] = cfg.runs;
  manifest["y_values"] = y_values;
  manifest["config_ini"] = config_text;
  manifest["notes"] = {
      {"y_sweep",
       "bracketing sweep 1 2 4 8 12 16 20 24 is an artifact default around "
       "the resampling counts where median and mean performance peak"}};
  manifest["files"] = files;
  detail::write_manifest(dir, manifest);
}

void analyze_experiment(const std::filesystem::path& dir) {
  json manifest = detail::load_manifest(dir);
  const detail::TraceSet set = detail::load_traces(dir, manifest);
  if (set.by_y.empty()) {
    throw TraceError("manifest lists no traces: " +
                     (dir / detail::kManifestName).string());
  }
  json files = json::array();
  for (const json& entry : manifest.at("files")) {
    const std::string kind = entry.value("kind", "");
    if (kind != "aggregate" && kind != "rates") files.push_back(entry);
  }
  json per_y = json::array();
  for (const auto& [y, traces] : set.by_y) {
    for (const Statistic statistic : {Statistic::median, Statistic::mean}) {
      const AggregateCurve curve = aggregate_runs(traces, statistic);
      const std::string csv = curve_to_csv(curve);
      const std::string name = aggregate_filename(statistic, y);
      write_text_file(dir / name, csv);
      json entry = detail::file_entry(name, "aggregate", csv);
      entry["y"] = y;
      entry["statistic"] = to_string(statistic);
      files.push_back(std::move(entry));
    }
    per_y.push_back(rates_entry(traces, y, set.config.strategy.lambda));
  }
  json rates;
  rates["lambda"] = set.config.strategy.lambda;
  rates["burn_in_fraction"] = kBurnInFraction;
  rates["per_y"] = per_y;
  const std::string rates_text = rates.dump(2) + "\n";
  write_text_file(dir / "rates.json", rates_text);
  files.push_back(detail::file_entry("rates.json", "rates", rates_text));
  manifest["files"] = files;
  detail::write_manifest(dir, manifest);
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  json manifest;
  try {
    manifest = detail::load_manifest(dir);
  } catch (const TraceError& e) {
    problems.emplace_back(e.what());
    return problems;
  }
  for (const json& entry : manifest.at("files")) {
    const std::string name = entry.at("path").get<std::string>();
    std::string text;
    try {
      text = read_text_file(dir / name);
    } catch (const IoError&) {
      problems.push_back("missing: " + name);
      continue;
    }
    if (fnv1a64_hex(text) != entry.at("fnv1a64").get<std::string>()) {
      problems.push_back("hash mismatch: " + name);
    }
  }
  return problems;
}

MisrankReport probe_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> errors = cfg.validate();
  if (!errors.empty()) throw std::invalid_argument(join(errors));

  std::vector<SelectionState> states;
  if (cfg.probe.source == StateSource::replay) {
    std::string text;
    try {
      text = read_text_file(cfg.probe.trace);
    } catch (const IoError&) {
      throw TraceError("missing trace: " + cfg.probe.trace);
    }
    std::vector<IterationRecord> records;
    try {
      records = records_from_csv(text);
    } catch (const std::invalid_argument& e) {
      throw TraceError("corrupt trace " + cfg.probe.trace + ": " + e.what());
    }
    const double unit =
        1.0 / std::sqrt(static_cast<double>(cfg.problem.d));
    for (const int n : cfg.probe.iterations) {
      const auto it = std::find_if(
          records.begin(), records.end(),
          [n](const IterationRecord& rec) {
            return rec.n == static_cast<std::uint64_t>(n);
          });
      if (it == records.end()) {
        throw TraceError("trace " + cfg.probe.trace +
                         " has no iteration " + std::to_string(n));
      }
      SelectionState state;
      state.center.assign(static_cast<std::size_t>(cfg.problem.d),
                          it->dist * unit);
      state.sigma = it->sigma;
      states.push_back(std::move(state));
    }
  }

  const MisrankReport report = probe_schedule(
      cfg.problem, cfg.strategy.lambda, cfg.strategy.resamplings, cfg.probe,
      SeedSpec{cfg.seed, {}}, states);

  json doc;
  doc["gamma"] = report.gamma;
  doc["delta0"] = report.delta0;
  doc["trials"] = cfg.probe.trials;
  doc["window"] = {{"lower", report.window.lower},
                   {"upper", report.window.upper},
                   {"empty", report.window.empty()}};
  doc["misranking_sum"] = report.misranking_sum;
  json points = json::array();
  for (const ProbePoint& point : report.points) {
    points.push_back(json{{"n", point.n},
                          {"delta", point.delta},
                          {"dist", point.dist},
                          {"sigma", point.sigma},
                          {"gap_ratio", point.gap_ratio},
                          {"m_branch", point.m_branch},
                          {"pair_proximity",
                           proportion_json(point.pair_proximity)},
                          {"noise_excess", proportion_json(point.noise_excess)},
                          {"misranking", proportion_json(point.misranking)}});
  }
  doc["points"] = points;

  const std::filesystem::path dir =
      cfg.out_dir.empty() ? std::filesystem::path(".")
                          : std::filesystem::path(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  }
  write_text_file(dir / "probe_report.json", doc.dump(2) + "\n");
  return report;
}

}  // namespace resample_es
