#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "resample_es/analysis.hpp"
#include "resample_es/config.hpp"
#include "resample_es/experiment.hpp"

namespace {

using namespace resample_es;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::vector<int> y_list;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* y_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  o.config_opt =
      cmd->add_option("--config", o.config_path, "configuration file");
  cmd->add_option("--set", o.overrides,
                  "override one key, e.g. --set strategy.budget=10000");
  o.seed_opt = cmd->add_option("--seed", o.seed, "master seed");
  o.jobs_opt =
      cmd->add_option("--jobs", o.jobs, "worker threads (0: one per core)");
  o.out_opt = cmd->add_option("--out", o.out, "output directory");
  o.y_opt = cmd->add_option(
      "--Y", o.y_list,
      "resampling counts to sweep; a single value also sets "
      "strategy.resamplings")
      ->delimiter(',');
}

// Precedence: built-in defaults, then the config file, then --set
// overrides, then the dedicated flags. The output directory falls back to
// RESAMPLE_ES_OUT and finally the working directory.
ExperimentConfig resolve(const CommonOpts& o) {
  ExperimentConfig cfg = o.config_opt->count() > 0
                             ? load_config(o.config_path)
                             : default_experiment();
  for (const std::string& kv : o.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects section.key=value, got '" +
                                  kv + "'");
    }
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed_opt->count() > 0) cfg.seed = o.seed;
  if (o.jobs_opt->count() > 0) cfg.jobs = o.jobs;
  if (o.y_opt->count() > 0) {
    cfg.y_sweep = o.y_list;
    if (o.y_list.size() == 1) cfg.strategy.resamplings = o.y_list.front();
  }
  if (o.out_opt->count() > 0) {
    cfg.out_dir = o.out;
  } else if (cfg.out_dir.empty()) {
    const char* env = std::getenv("RESAMPLE_ES_OUT");
    if (env != nullptr && *env != '\0') cfg.out_dir = env;
  }
  return cfg;
}

std::filesystem::path effective_dir(const ExperimentConfig& cfg,
                                    const std::string& positional) {
  if (!positional.empty()) return positional;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  return ".";
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const TraceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

void print_probe_report(const MisrankReport& report) {
  std::printf("gamma = %.6g, delta0 = %.6g, window = (%.6g, %.6g)%s\n",
              report.gamma, report.delta0, report.window.lower,
              report.window.upper, report.window.empty() ? " [empty]" : "");
  for (const ProbePoint& point : report.points) {
    std::printf(
        "n=%d delta=%.4g dist=%.4g P1=%.5f+-%.5f P3=%.5f+-%.5f "
        "P4=%.5f+-%.5f\n",
        point.n, point.delta, point.dist, point.pair_proximity.p_hat,
        point.pair_proximity.half_width, point.noise_excess.p_hat,
        point.noise_excess.half_width, point.misranking.p_hat,
        point.misranking.half_width);
  }
  std::printf("misranking_sum = %.6g\n", report.misranking_sum);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-adaptive (mu,lambda) evolution strategy on the noisy "
               "sphere: experiment runner, rate analysis, and misranking "
               "probes"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* cmd_run =
      app.add_subcommand("run", "execute the configured experiment batch");
  add_common(cmd_run, run_opts);

  CommonOpts analyze_opts;
  std::string analyze_dir;
  CLI::App* cmd_analyze = app.add_subcommand(
      "analyze", "recompute aggregates and rates from stored traces");
  add_common(cmd_analyze, analyze_opts);
  cmd_analyze->add_option("dir", analyze_dir, "experiment directory");

  CommonOpts probe_opts;
  CLI::App* cmd_probe = app.add_subcommand(
      "probe", "estimate pair-proximity, noise-excess, and misranking "
               "probabilities along a decay schedule");
  add_common(cmd_probe, probe_opts);

  CommonOpts plot_opts;
  std::string plot_dir;
  CLI::App* cmd_plot = app.add_subcommand(
      "plot", "emit per-Y plot tables and SVG charts from stored traces");
  add_common(cmd_plot, plot_opts);
  cmd_plot->add_option("dir", plot_dir, "experiment directory");

  CommonOpts thr_opts;
  double thr_alpha = 0.05;
  double thr_alpha_prime = -1.0;
  CLI::App* cmd_thr = app.add_subcommand(
      "threshold", "print the minimal noise-decay exponent z for log-linear "
                   "convergence and the per-evaluation rate bound");
  add_common(cmd_thr, thr_opts);
  cmd_thr->add_option("--alpha", thr_alpha, "per-iteration decay rate");
  cmd_thr->add_option("--alpha-prime", thr_alpha_prime,
                      "lower-envelope decay rate (default: alpha)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (cmd_run->parsed()) {
    return guarded([&] {
      ExperimentConfig cfg = resolve(run_opts);
      run_experiment(cfg);
      std::printf("experiment complete: %s\n",
                  effective_dir(cfg, "").string().c_str());
    });
  }
  if (cmd_analyze->parsed()) {
    return guarded([&] {
      const ExperimentConfig cfg = resolve(analyze_opts);
      const std::filesystem::path dir = effective_dir(cfg, analyze_dir);
      analyze_experiment(dir);
      std::printf("analysis refreshed: %s\n", dir.string().c_str());
    });
  }
  if (cmd_probe->parsed()) {
    return guarded([&] {
      const ExperimentConfig cfg = resolve(probe_opts);
      const MisrankReport report = probe_experiment(cfg);
      print_probe_report(report);
    });
  }
  if (cmd_plot->parsed()) {
    return guarded([&] {
      const ExperimentConfig cfg = resolve(plot_opts);
      const std::filesystem::path dir = effective_dir(cfg, plot_dir);
      emit_plot_data(dir);
      std::printf("plot data written: %s\n", dir.string().c_str());
    });
  }
  return guarded([&] {
    const ExperimentConfig cfg = resolve(thr_opts);
    const double alpha_prime =
        thr_alpha_prime < 0.0 ? thr_alpha : thr_alpha_prime;
    const double z_threshold = theorem_threshold(
        cfg.problem.p, cfg.problem.d, thr_alpha, alpha_prime);
    const double rate = corollary_rate(thr_alpha, cfg.strategy.lambda,
                                       cfg.strategy.resamplings);
    std::printf("z_threshold = %.17g\n", z_threshold);
    std::printf("per_evaluation_rate = %.17g\n", rate);
  });
}
